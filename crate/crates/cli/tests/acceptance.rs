//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use coulomb_tmatrix::series::half_integer_sum;
use coulomb_tmatrix::{
    aux_integrals, born_term, coulomb_potential, evaluate, fock_sum, make_energy_state, make_fock_point,
    omega_grid, project_partial_wave, rational_sum, schwinger_integral, standard_omega_grid, tmatrix_half,
    tmatrix_schwinger, tmatrix_series, EnergyState, EvalOptions, FockPoint, FormVariant, QuadratureSpec,
    RationalGamma, Representation, SeriesOptions, TMatrixError, TwoBodySystem,
};
use coulomb_tmatrix_cli::validation::Y_SELECTION;
use coulomb_tmatrix_cli::{run_validation, ValidationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Largest deviation and where it occurred.
#[derive(Default)]
struct Worst {
    dev: f64,
    at: String,
}

impl Worst {
    fn push(&mut self, dev: f64, at: impl FnOnce() -> String) {
        if !(dev <= self.dev) {
            self.dev = dev;
            self.at = at();
        }
    }

    fn within(self, limit: f64, what: &str) -> Outcome {
        if self.dev <= limit {
            Ok(format!("{what}: max dev {:.2e} <= {limit:.0e}", self.dev))
        } else {
            Err(format!("{what}: max dev {:.2e} > {limit:.0e} at {}", self.dev, self.at))
        }
    }
}

fn err(e: TMatrixError) -> String {
    e.to_string()
}

/// State and point with k = k' = κ = 1 at Fock angle ω (cos θ = cos ω).
fn on_sphere(gamma: f64, omega: f64) -> Result<(EnergyState, FockPoint), String> {
    let st = EnergyState::dimensionless(1.0, gamma).map_err(err)?;
    let p = make_fock_point(&st, 1.0, 1.0, omega.cos()).map_err(err)?;
    Ok((st, p))
}

fn interior_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let g = omega_grid(n + 2, lo, hi);
    g[1..=n].to_vec()
}

fn criterion_1() -> Outcome {
    let opts = SeriesOptions::default();
    let mut w = Worst::default();
    for x in interior_grid(100, 0.05, PI - 0.05) {
        for positive in [true, false] {
            let g = if positive { 0.5 } else { -0.5 };
            let s = fock_sum(g, x, &opts).map_err(err)?.value;
            let h = half_integer_sum(positive, x).map_err(err)?;
            w.push(rel(s, h), || format!("gamma={g} w={x}"));
        }
    }
    w.within(1e-10, "half-integer sum identity, 100 points, both signs")
}

fn criterion_2() -> Outcome {
    let opts = SeriesOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut w = Worst::default();
    for _ in 0..1000 {
        let g = rng.gen_range(-0.9..3.0);
        let x = rng.gen_range(0.05..PI - 0.05);
        let i = schwinger_integral(g, x).map_err(err)?.value;
        let s = fock_sum(g, x, &opts).map_err(err)?.value;
        w.push(rel(i * x.sin(), s), || format!("gamma={g} w={x}"));
    }
    w.within(1e-8, "sin(w) I(gamma, w) vs S(gamma, w), 1000 random points")
}

fn criterion_3() -> Outcome {
    let opts = SeriesOptions::default();
    let quad = QuadratureSpec::default();
    let mut w = Worst::default();
    for g in [0.5, -0.5] {
        for x in standard_omega_grid() {
            let (st, p) = on_sphere(g, x)?;
            let closed = tmatrix_half(&st, &p, FormVariant::Verified).map_err(err)?.value;
            let series = tmatrix_series(&st, &p, &opts).map_err(err)?.value;
            w.push(rel(closed, series), || format!("closed vs series gamma={g} w={x}"));
            if g > 0.0 {
                let integral = tmatrix_schwinger(&st, &p, &quad).map_err(err)?.value;
                w.push(rel(integral, series), || format!("integral vs series w={x}"));
                w.push(rel(integral, closed), || format!("integral vs closed w={x}"));
            }
        }
    }
    w.within(1e-9, "gamma=+-1/2 closed form, series and integral on the standard grid")
}

fn criterion_4(report: &ValidationReport) -> Outcome {
    let mut w = Worst::default();
    for x in standard_omega_grid() {
        for (g, sign) in [(0.5, 1.0), (-0.5, -1.0)] {
            let a = aux_integrals(g, x).map_err(err)?;
            w.push((a.x_gamma - sign * 2.0 * (0.5 * x).sin()).abs(), || format!("x gamma={g} w={x}"));
            w.push((a.c_gamma - (0.5 - sign / PI)).abs(), || format!("c gamma={g} w={x}"));
        }
    }
    let values = w.within(1e-10, "x and c at gamma=+-1/2")?;
    let sel = report
        .identity(Y_SELECTION)
        .ok_or("y-integrand selection missing from the report")?;
    if !sel.status.is_confirmed() {
        return Err(format!("y-integrand selection not confirmed: {}", sel.detail));
    }
    Ok(format!("{values}; report records: {}", sel.detail))
}

fn criterion_5() -> Outcome {
    let opts = SeriesOptions::default();
    let mut w = Worst::default();
    let mut small = 0;
    let mut large = 0;
    for (n, m) in [(1, 3), (1, 4), (2, 3), (3, 2), (5, 2), (7, 2)] {
        if n <= m {
            small += 1;
        } else {
            large += 1;
        }
        for negative in [false, true] {
            let r = RationalGamma::new(negative, n, m).map_err(err)?;
            for x in standard_omega_grid() {
                let a = rational_sum(r, x).map_err(err)?;
                let b = fock_sum(r.value(), x, &opts).map_err(err)?.value;
                w.push(rel(a, b), || format!("gamma={r} w={x}"));
            }
        }
    }
    w.within(1e-9, &format!("rational sum vs series ({small} n/m<=1 and {large} n/m>1 magnitudes, both signs)"))
}

fn criterion_6(report: &ValidationReport) -> Outcome {
    if report.forms.len() != 12 {
        return Err(format!("expected 12 closed forms, report has {}", report.forms.len()));
    }
    let mut confirmed = 0;
    let mut corrected = 0;
    for f in &report.forms {
        if !f.passes() {
            return Err(format!("{} discrepant without a confirmed correction", f.form));
        }
        if f.printed.is_confirmed() {
            confirmed += 1;
        } else {
            corrected += 1;
        }
    }
    Ok(format!(
        "{confirmed} printed forms confirmed, {corrected} discrepant with confirmed corrections (threshold {:e})",
        report.metadata.tolerance
    ))
}

fn criterion_7() -> Outcome {
    let gamma = 1e-8;
    let st = make_energy_state(TwoBodySystem::natural(1.0).map_err(err)?, -0.5)
        .and_then(|s| s.with_gamma(gamma))
        .map_err(err)?;
    let opts = EvalOptions::default();
    let mut reps_w = Worst::default();
    let mut direct_w = Worst::default();
    let mut applicable = Vec::new();
    for &(k, kp, c) in &[(1.0, 2.0, 0.3), (0.5, 0.7, -0.9), (3.0, 0.2, 0.99), (1.0, 1.0, -1.0)] {
        let p = make_fock_point(&st, k, kp, c).map_err(err)?;
        let born = born_term(&st, &p).map_err(err)?;
        let direct = coulomb_potential(st.system(), k, kp, c);
        direct_w.push(rel(born, direct), || format!("k={k} k'={kp} cos={c}"));
        for rep in Representation::ALL {
            match evaluate(rep, &st, &p, &opts) {
                Ok(v) => {
                    if !applicable.contains(&rep) {
                        applicable.push(rep);
                    }
                    reps_w.push(rel(v.value, born), || format!("{rep} k={k} k'={kp} cos={c}"));
                }
                Err(TMatrixError::NoClosedForm(_) | TMatrixError::NotRational(_)) => {}
                Err(e) => return Err(format!("{rep}: {e}")),
            }
        }
    }
    let names: Vec<&str> = applicable.iter().map(|r| r.name()).collect();
    let a = reps_w.within(1e-6, &format!("{} vs Born at gamma=1e-8", names.join(", ")))?;
    let b = direct_w.within(1e-12, "Born term vs 4 pi q1q2/|k-k'|^2")?;
    Ok(format!("{a}; {b}"))
}

fn criterion_8() -> Outcome {
    let opts = EvalOptions::default();
    let mut checked = 0;
    for gamma in [0.5, -0.5, 1.0 / 3.0, 2.5, 2.0 / 3.0, 0.3, -0.7] {
        let st = EnergyState::dimensionless(1.3, gamma).map_err(err)?;
        for &(k, kp) in &[(0.4, 2.2), (1.0, 1.7), (0.05, 9.0)] {
            for c in [-1.0, -0.4, 0.2, 0.95] {
                let p = make_fock_point(&st, k, kp, c).map_err(err)?;
                let q = make_fock_point(&st, kp, k, c).map_err(err)?;
                for rep in Representation::ALL {
                    match (evaluate(rep, &st, &p, &opts), evaluate(rep, &st, &q, &opts)) {
                        (Ok(a), Ok(b)) => {
                            if a.value.to_bits() != b.value.to_bits() {
                                return Err(format!(
                                    "{rep} gamma={gamma} k={k} k'={kp} cos={c}: {} != {}",
                                    a.value, b.value
                                ));
                            }
                            checked += 1;
                        }
                        (Err(a), Err(b)) if a == b => {}
                        (a, b) => return Err(format!("{rep}: exchange changed the outcome: {a:?} vs {b:?}")),
                    }
                }
            }
        }
    }

    let bin = env!("CARGO_BIN_EXE_coulomb-tmatrix");
    let run = |format: &str, threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(bin)
            .args([
                "grid", "--gamma", "0.62", "--kappa", "1", "--k-list", "0.3,1,2.5", "--kp-list", "0.3,1,4",
                "--cos-list", "-1,-0.3,0.4,1", "--reps", "born,series,schwinger,separated,rational",
                "--format", format, "--threads", threads,
            ])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("grid exited with {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    for format in ["csv", "json"] {
        let reference = run(format, "1")?;
        for threads in ["1", "4"] {
            if run(format, threads)? != reference {
                return Err(format!("{format} export differs with --threads {threads}"));
            }
        }
    }
    Ok(format!(
        "{checked} exchanged evaluations bit-identical; csv and json exports identical across runs and 1/4 threads"
    ))
}

fn criterion_9() -> Outcome {
    let opts = SeriesOptions::default();
    let mut ratio = Worst::default();
    for eps in [1e-3, 1e-5] {
        for x in omega_grid(26, 0.5, 3.0) {
            let g = -1.0 + eps;
            let v = (1.0 + g) * fock_sum(g, x, &opts).map_err(err)?.value;
            ratio.push(rel(v, x.sin()) / eps, || format!("eps={eps} w={x}"));
        }
    }
    for n in 1..=6 {
        match fock_sum(-(n as f64), 1.0, &opts) {
            Err(TMatrixError::BoundStatePole(_)) => {}
            other => return Err(format!("gamma=-{n}: expected BoundStatePole, got {other:?}")),
        }
    }
    for g in [-1.0 + 1e-12, -0.5, -2.0 - 1e-9] {
        if let Err(e) = fock_sum(g, 1.0, &opts) {
            return Err(format!("gamma={g} is not a pole but failed: {e}"));
        }
    }
    let r = ratio.within(10.0, "(1+gamma) S vs sin w, relative error in units of eps, w in [0.5, 3]")?;
    Ok(format!("{r}; poles raised at gamma=-1..-6 only"))
}

fn criterion_10() -> Outcome {
    let st = EnergyState::dimensionless(1.0, 0.5).map_err(err)?;
    let (k, kp, c) = (2.0, 0.5, 0.0);
    let mut sum = 0.0;
    for l in 0..=20u32 {
        let t = project_partial_wave(l, &st, k, kp, Representation::Series).map_err(err)?;
        sum += (2 * l + 1) as f64 * t.value * coulomb_tmatrix::quadrature::legendre(l, c);
    }
    let p = make_fock_point(&st, k, kp, c).map_err(err)?;
    let direct = evaluate(Representation::Series, &st, &p, &EvalOptions::default())
        .map_err(err)?
        .value;
    let mut w = Worst::default();
    w.push(rel(sum, direct), String::new);
    let recon = w.within(1e-4, "Legendre reconstruction from l <= 20")?;
    match project_partial_wave(0, &st, 1.0, 1.0, Representation::Series) {
        Err(TMatrixError::OnShellDiagonal) => Ok(format!("{recon}; k=k' rejected")),
        other => Err(format!("k=k' not rejected: {other:?}")),
    }
}

fn main() -> ExitCode {
    let report = match run_validation(1e-8) {
        Ok(r) => r,
        Err(e) => {
            println!("validation run failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: [(u32, Box<dyn Fn() -> Outcome + '_>); 10] = [
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(|| criterion_4(&report))),
        (5, Box::new(criterion_5)),
        (6, Box::new(|| criterion_6(&report))),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (n, f) in criteria.iter() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n}: PASS ({secs:.2}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL ({secs:.2}s) {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
