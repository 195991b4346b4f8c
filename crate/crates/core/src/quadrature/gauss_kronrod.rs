//! Globally adaptive 21-point Gauss–Kronrod integration.
//!
//! Error estimates follow QUADPACK's qk21. Segments are refined largest-error
//! first; the final total is summed in left-to-right order so the result does
//! not depend on refinement history beyond the (deterministic) segment set.

use crate::error::{Result, TMatrixError};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Upper bound on the number of segments in one adaptive run.
const MAX_SEGMENTS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

fn qk21<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center)?;
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let result = resk * half;
    resabs *= abs_half;
    resasc *= abs_half;
    let mut abserr = ((resk - resg) * half).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (1.0f64).min((200.0 * abserr / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        abserr = abserr.max(50.0 * f64::EPSILON * resabs);
    }
    if !result.is_finite() || !abserr.is_finite() {
        return Err(TMatrixError::QuadratureFailure {
            requested: 0.0,
            achieved: f64::INFINITY,
        });
    }
    Ok((result, abserr))
}

/// Adaptive integration of a fallible integrand over consecutive breakpoints.
pub(crate) fn adaptive<F>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<QuadValue>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut segments: Vec<Segment> = Vec::new();
    let mut evaluations = 0usize;
    for w in breaks.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (value, err) = qk21(&mut f, w[0], w[1])?;
        evaluations += 21;
        segments.push(Segment {
            a: w[0],
            b: w[1],
            value,
            err,
            depth: 0,
        });
    }
    if segments.is_empty() {
        return Ok(QuadValue {
            value: 0.0,
            abs_err: 0.0,
            evaluations,
        });
    }

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.err).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        let pick = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.depth < max_depth)
            .max_by(|(_, x), (_, y)| x.err.total_cmp(&y.err))
            .map(|(i, _)| i);
        let Some(idx) = pick else {
            return Err(TMatrixError::QuadratureFailure {
                requested: target,
                achieved: total_err,
            });
        };
        if segments.len() >= MAX_SEGMENTS {
            return Err(TMatrixError::QuadratureFailure {
                requested: target,
                achieved: total_err,
            });
        }
        let seg = segments[idx];
        let mid = 0.5 * (seg.a + seg.b);
        let (lv, le) = qk21(&mut f, seg.a, mid)?;
        let (rv, re) = qk21(&mut f, mid, seg.b)?;
        evaluations += 42;
        segments[idx] = Segment {
            a: seg.a,
            b: mid,
            value: lv,
            err: le,
            depth: seg.depth + 1,
        };
        segments.insert(
            idx + 1,
            Segment {
                a: mid,
                b: seg.b,
                value: rv,
                err: re,
                depth: seg.depth + 1,
            },
        );
    }

    // segments stay ordered by left endpoint
    let mut value = 0.0;
    let mut comp = 0.0;
    for s in &segments {
        // Neumaier summation
        let t = value + s.value;
        if value.abs() >= s.value.abs() {
            comp += (value - t) + s.value;
        } else {
            comp += (s.value - t) + value;
        }
        value = t;
    }
    Ok(QuadValue {
        value: value + comp,
        abs_err: segments.iter().map(|s| s.err).sum(),
        evaluations,
    })
}
