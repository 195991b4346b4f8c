//! Explicit closed forms of the T-matrix bracket at special γ, the
//! singularity-separated form for general γ, and the finite rational-γ sum.
//!
//! Every explicit form is written as `1/sin²(ω/2) + even(ω) + σ·odd(ω)` where
//! σ is the sign of γ, so one expression covers both signs. Forms come in two
//! variants: exactly as printed, and a verified one that agrees with the
//! series. The two coincide wherever the printed form already checks out.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Result, TMatrixError};
use crate::eval::{Diagnostics, EvalResult, Representation, ValidationStatus, Warning};
use crate::kinematics::{EnergyState, FockPoint};
use crate::quadrature::{integrate_aux, AuxKind, QuadratureSpec};
use crate::series::{self, RationalGamma, SeriesOptions};

/// Maximum relative deviation from the series for a form to count as confirmed.
pub const VALIDATION_THRESHOLD: f64 = 1e-8;

/// Below this distance from ω = π removable 0/0 forms are extrapolated.
pub const BACKWARD_EXTRAPOLATION_BAND: f64 = 1e-4;

/// Largest |γ| accepted by the separated form.
pub const SEPARATED_MAX_GAMMA: f64 = 4.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClosedFormFamily {
    Half,
    ThreeHalves,
    FiveHalves,
    SevenHalves,
    Third,
    Quarter,
}

impl ClosedFormFamily {
    pub const ALL: [ClosedFormFamily; 6] = [
        ClosedFormFamily::Half,
        ClosedFormFamily::ThreeHalves,
        ClosedFormFamily::FiveHalves,
        ClosedFormFamily::SevenHalves,
        ClosedFormFamily::Third,
        ClosedFormFamily::Quarter,
    ];

    /// `(n, m)` with |γ| = n/m.
    pub fn fraction(&self) -> (u32, u32) {
        match self {
            ClosedFormFamily::Half => (1, 2),
            ClosedFormFamily::ThreeHalves => (3, 2),
            ClosedFormFamily::FiveHalves => (5, 2),
            ClosedFormFamily::SevenHalves => (7, 2),
            ClosedFormFamily::Third => (1, 3),
            ClosedFormFamily::Quarter => (1, 4),
        }
    }

    pub fn magnitude(&self) -> f64 {
        let (n, m) = self.fraction();
        n as f64 / m as f64
    }
}

/// One explicit closed form, identified by its signed γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedFormId {
    family: ClosedFormFamily,
    negative: bool,
}

impl ClosedFormId {
    pub const ALL: [ClosedFormId; 12] = {
        let mut out = [ClosedFormId {
            family: ClosedFormFamily::Half,
            negative: false,
        }; 12];
        let mut i = 0;
        while i < 6 {
            out[2 * i].family = ClosedFormFamily::ALL[i];
            out[2 * i + 1].family = ClosedFormFamily::ALL[i];
            out[2 * i + 1].negative = true;
            i += 1;
        }
        out
    };

    pub fn new(family: ClosedFormFamily, negative: bool) -> Self {
        Self { family, negative }
    }

    /// The form whose γ equals `gamma` to within a few ulps.
    pub fn from_gamma(gamma: f64) -> Option<Self> {
        let r = RationalGamma::from_f64(gamma, 4)?;
        ClosedFormFamily::ALL
            .into_iter()
            .find(|f| f.fraction() == (r.numerator(), r.denominator()))
            .map(|family| Self {
                family,
                negative: r.is_negative(),
            })
    }

    pub fn family(&self) -> ClosedFormFamily {
        self.family
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn gamma(&self) -> RationalGamma {
        let (n, m) = self.family.fraction();
        RationalGamma::new(self.negative, n, m).expect("fractions are nonzero")
    }

    pub fn value(&self) -> f64 {
        self.sign() * self.family.magnitude()
    }

    fn index(&self) -> usize {
        2 * self.family as usize + self.negative as usize
    }
}

impl fmt::Display for ClosedFormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gamma={}", self.gamma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormVariant {
    /// Transcribed literally.
    Printed,
    /// Corrected wherever the printed expression disagrees with the series.
    Verified,
}

/// Split of an explicit bracket into parts even and odd under γ → −γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitParts {
    pub born: f64,
    pub even: f64,
    pub odd: f64,
}

impl ExplicitParts {
    pub fn bracket(&self, sign: f64) -> f64 {
        self.born + self.even + sign * self.odd
    }

    fn scale(&self) -> f64 {
        self.born.abs() + self.even.abs() + self.odd.abs()
    }
}

fn ln_abs_tan(x: f64) -> f64 {
    x.tan().abs().ln()
}

pub fn explicit_parts(family: ClosedFormFamily, variant: FormVariant, omega: f64) -> ExplicitParts {
    let s = (0.5 * omega).sin();
    let c = (0.5 * omega).cos();
    let sin_w = omega.sin();
    let born = 1.0 / (s * s);
    let printed = variant == FormVariant::Printed;
    let (even, odd) = match family {
        ClosedFormFamily::Half => {
            let pi_term = -PI / (2.0 * s);
            let log_term = -ln_abs_tan(0.25 * omega) / c;
            if printed {
                (pi_term, log_term)
            } else {
                (log_term, pi_term)
            }
        }
        ClosedFormFamily::ThreeHalves => {
            let a = 1.5 * omega;
            let log = if printed {
                ln_abs_tan(0.5 * omega)
            } else {
                ln_abs_tan(0.25 * omega)
            };
            (-6.0 * a.sin() / sin_w * log - 12.0, -3.0 * PI * a.cos() / sin_w)
        }
        ClosedFormFamily::FiveHalves => {
            let a = 2.5 * omega;
            let cw = omega.cos();
            (
                -10.0 * a.sin() / sin_w * ln_abs_tan(0.25 * omega) - 40.0 * cw - 20.0 / 3.0,
                -5.0 * PI * a.cos() / sin_w,
            )
        }
        ClosedFormFamily::SevenHalves => {
            let a = 3.5 * omega;
            let cw = omega.cos();
            (
                -14.0 * a.sin() / sin_w * ln_abs_tan(0.25 * omega) - 112.0 * cw * cw
                    - 56.0 / 3.0 * cw
                    + 112.0 / 5.0,
                -7.0 * PI * a.cos() / sin_w,
            )
        }
        ClosedFormFamily::Third => {
            let t = omega / 6.0;
            let (st, ct) = t.sin_cos();
            let (s3, c3) = (omega / 3.0).sin_cos();
            let tt = t.tan();
            let atanh_like = ((tt + SQRT3) / (tt - SQRT3)).abs().ln();
            let odd = -(2.0 * PI / 3.0) * (c3 - s3 / SQRT3) / sin_w;
            let even = if printed {
                2.0 * s3 / (3.0 * sin_w) * ((st - 3.0 * ct) / (4.0 * st * st)).abs().ln()
                    - 2.0 * c3 / (3.0 * SQRT3 * sin_w) * atanh_like
            } else {
                2.0 * s3 / (3.0 * sin_w) * ((st * st - 3.0 * ct * ct) / (4.0 * st * st)).abs().ln()
                    - 2.0 / SQRT3 * c3 / sin_w * atanh_like
            };
            (even, odd)
        }
        ClosedFormFamily::Quarter => {
            let (s4, c4) = (0.25 * omega).sin_cos();
            let t8 = (0.125 * omega).tan();
            (
                -s4 / sin_w * t8.abs().ln() - c4 / sin_w * ((1.0 + t8) / (1.0 - t8)).abs().ln(),
                -(PI / 2.0) * (c4 - s4) / sin_w,
            )
        }
    };
    ExplicitParts { born, even, odd }
}

/// What the verified variant changes relative to the printed one, if anything.
pub fn correction_note(id: ClosedFormId) -> Option<&'static str> {
    match (id.family, id.negative) {
        (ClosedFormFamily::Half, true) => Some(
            "the lower sign flips the pi/(2 sin(w/2)) term, not the ln|tan(w/4)|/cos(w/2) term",
        ),
        (ClosedFormFamily::ThreeHalves, _) => {
            Some("the logarithm is ln|tan(w/4)|, not ln|tan(w/2)|")
        }
        (ClosedFormFamily::Third, _) => Some(
            "the first log argument is (sin^2 t - 3cos^2 t)/(4 sin^2 t) with t = w/6, and the \
             second log carries 2cos(w/3)/(sqrt(3) sin w), not 2cos(w/3)/(3 sqrt(3) sin w)",
        ),
        _ => None,
    }
}

/// Bracket of an explicit form at ω, without any treatment of ω = π.
pub fn explicit_bracket(id: ClosedFormId, variant: FormVariant, omega: f64) -> f64 {
    explicit_parts(id.family, variant, omega).bracket(id.sign())
}

/// Value at h = 0 of the polynomial through `(hs[i], vals[i])`, with the
/// difference between the last two orders as an error estimate.
fn neville_at_zero(hs: &[f64], vals: &[f64]) -> (f64, f64) {
    let mut p = vals.to_vec();
    let n = p.len();
    let mut lower = p[0];
    for level in 1..n {
        lower = p[0];
        // after this sweep p[i] interpolates nodes i..=i+level
        for i in 0..n - level {
            let (hi, hj) = (hs[i], hs[i + level]);
            p[i] = (hj * p[i] - hi * p[i + 1]) / (hj - hi);
        }
    }
    (p[0], (p[0] - lower).abs())
}

/// Evaluate `f` at ω, extrapolating from `ω = π − 0.01·j` when ω is within
/// the backward band. Returns `(value, extrapolation error, extrapolated)`.
fn backward_safe<F>(omega: f64, f: F) -> Result<(f64, f64, bool)>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = PI - omega;
    if h >= BACKWARD_EXTRAPOLATION_BAND {
        return Ok((f(omega)?, 0.0, false));
    }
    let hs: Vec<f64> = (1..=6).map(|j| 0.01 * j as f64).collect();
    let vals = hs.iter().map(|&hj| f(PI - hj)).collect::<Result<Vec<_>>>()?;
    let shifted: Vec<f64> = hs.iter().map(|&hj| hj - h).collect();
    let (v, err) = neville_at_zero(&shifted, &vals);
    Ok((v, err, true))
}

fn check_point(point: &FockPoint) -> Result<f64> {
    if point.is_forward() {
        return Err(TMatrixError::ForwardSingularity);
    }
    Ok(point.omega())
}

fn check_gamma_matches(id: ClosedFormId, gamma: f64) -> Result<()> {
    if (gamma - id.value()).abs() <= 1e-12 * gamma.abs().max(1.0) {
        Ok(())
    } else {
        Err(TMatrixError::NoClosedForm(gamma))
    }
}

/// Explicit closed form at the γ of `id`; `state` must carry that γ.
pub fn tmatrix_explicit(
    id: ClosedFormId,
    state: &EnergyState,
    point: &FockPoint,
    variant: FormVariant,
) -> Result<EvalResult> {
    check_gamma_matches(id, state.gamma())?;
    let omega = check_point(point)?;
    let parts_at = |w: f64| explicit_parts(id.family, variant, w);
    let mut warnings = Vec::new();
    let (bracket, extra_err) = match variant {
        FormVariant::Verified => {
            let (v, e, extrapolated) = backward_safe(omega, |w| Ok(parts_at(w).bracket(id.sign())))?;
            if extrapolated {
                warnings.push(Warning::BackwardExtrapolated);
            }
            (v, e)
        }
        FormVariant::Printed => {
            let v = parts_at(omega).bracket(id.sign());
            if !v.is_finite() {
                return Err(TMatrixError::BackwardIndeterminate);
            }
            (v, 0.0)
        }
    };
    let status = form_status(id, variant);
    if !status.is_confirmed() {
        warnings.push(Warning::PrintedFormDiscrepant);
    } else if variant == FormVariant::Verified && !form_status(id, FormVariant::Printed).is_confirmed()
    {
        warnings.push(Warning::CorrectedForm);
    }
    let prefactor = point.prefactor(state);
    let scale = parts_at(omega.min(PI - BACKWARD_EXTRAPOLATION_BAND)).scale();
    let rep = match variant {
        FormVariant::Verified => Representation::ClosedForm,
        FormVariant::Printed => Representation::ClosedFormPrinted,
    };
    Ok(EvalResult::new(
        rep,
        prefactor,
        bracket,
        Diagnostics {
            terms_used: None,
            abs_err_est: prefactor.abs() * (32.0 * f64::EPSILON * scale + extra_err),
            warnings,
            validation: Some(status),
        },
    ))
}

/// Closed form at γ = ±1/2.
pub fn tmatrix_half(state: &EnergyState, point: &FockPoint, variant: FormVariant) -> Result<EvalResult> {
    let gamma = state.gamma();
    let id = ClosedFormId::from_gamma(gamma)
        .filter(|id| id.family == ClosedFormFamily::Half)
        .ok_or(TMatrixError::NoClosedForm(gamma))?;
    tmatrix_explicit(id, state, point, variant)
}

/// `n` equispaced angles on `[lo, hi]`.
pub fn omega_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// The 50-point grid on `[0.05, π − 0.05]` used for validation.
pub fn standard_omega_grid() -> Vec<f64> {
    omega_grid(50, 0.05, PI - 0.05)
}

/// Largest relative deviation of `f` from `oracle` over `grid`.
pub fn compare_on_grid<F, G>(grid: &[f64], threshold: f64, f: F, oracle: G) -> Result<ValidationStatus>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    let mut worst = 0.0f64;
    let mut at = grid.first().copied().unwrap_or(0.0);
    for &w in grid {
        let reference = oracle(w)?;
        let value = f(w)?;
        let dev = if value.is_finite() {
            (value - reference).abs() / reference.abs()
        } else {
            f64::INFINITY
        };
        if !(dev <= worst) {
            worst = dev;
            at = w;
        }
    }
    Ok(if worst <= threshold {
        ValidationStatus::Confirmed { max_rel_dev: worst }
    } else {
        ValidationStatus::Discrepant {
            max_rel_dev: worst,
            omega_at_max: at,
        }
    })
}

/// Check one explicit form against the series bracket on `grid`.
pub fn validate_form(
    id: ClosedFormId,
    variant: FormVariant,
    grid: &[f64],
    threshold: f64,
    opts: &SeriesOptions,
) -> Result<ValidationStatus> {
    let gamma = id.value();
    compare_on_grid(
        grid,
        threshold,
        |w| Ok(explicit_bracket(id, variant, w)),
        |w| Ok(series::series_bracket(gamma, w, opts)?.value),
    )
}

static FORM_STATUS: [OnceLock<ValidationStatus>; 24] = [const { OnceLock::new() }; 24];

/// Validation status of a form on the standard grid, computed once per process.
pub fn form_status(id: ClosedFormId, variant: FormVariant) -> ValidationStatus {
    let slot = 2 * id.index() + (variant == FormVariant::Verified) as usize;
    *FORM_STATUS[slot].get_or_init(|| {
        validate_form(
            id,
            variant,
            &standard_omega_grid(),
            VALIDATION_THRESHOLD,
            &SeriesOptions::default(),
        )
        .unwrap_or(ValidationStatus::Discrepant {
            max_rel_dev: f64::INFINITY,
            omega_at_max: f64::NAN,
        })
    })
}

/// Auxiliary quantities of the singularity-separated form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularitySeparatedAux {
    /// `∫₀^ω sin(γφ) cot(φ/2) dφ`
    pub x_gamma: f64,
    /// `∫_ω^π sin(γφ) ln|sin(φ/2)| dφ`
    pub y_gamma: f64,
    /// `½ (1 − x_γ(π)/π)`
    pub c_gamma: f64,
}

fn check_separated_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma.abs() > SEPARATED_MAX_GAMMA {
        return Err(TMatrixError::GammaOutOfRange(gamma));
    }
    if gamma != 0.0 && gamma.fract() == 0.0 {
        return Err(TMatrixError::DegenerateGamma(gamma));
    }
    Ok(())
}

pub fn aux_integrals(gamma: f64, omega: f64) -> Result<SingularitySeparatedAux> {
    aux_integrals_with(gamma, omega, AuxKind::YGamma, &QuadratureSpec::default())
}

/// As [`aux_integrals`] with a choice of y-integrand and quadrature.
pub fn aux_integrals_with(
    gamma: f64,
    omega: f64,
    y_kind: AuxKind,
    spec: &QuadratureSpec,
) -> Result<SingularitySeparatedAux> {
    check_separated_gamma(gamma)?;
    let x_gamma = integrate_aux(AuxKind::XGamma, gamma, omega, spec)?;
    let x_pi = integrate_aux(AuxKind::XGamma, gamma, PI, spec)?;
    let y_gamma = integrate_aux(y_kind, gamma, omega, spec)?;
    Ok(SingularitySeparatedAux {
        x_gamma,
        y_gamma,
        c_gamma: 0.5 * (1.0 - x_pi / PI),
    })
}

/// Auxiliary quantities at γ = ±1/2 in closed form.
pub fn aux_half_closed(positive: bool, omega: f64) -> SingularitySeparatedAux {
    let sign = if positive { 1.0 } else { -1.0 };
    let s = (0.5 * omega).sin();
    let c = (0.5 * omega).cos();
    let y = 2.0 * c * (s.ln() - 1.0) + 2.0 * (1.0 / (0.25 * omega).tan()).ln();
    SingularitySeparatedAux {
        x_gamma: sign * 2.0 * s,
        y_gamma: sign * y,
        c_gamma: 0.5 - sign / PI,
    }
}

/// Angles at which the y-integrand candidates are compared.
pub const Y_SELECTION_OMEGAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 3.0];

/// Outcome of matching the two candidate y-integrands to the γ = ±1/2 closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YVariantSelection {
    pub chosen: AuxKind,
    /// Largest absolute deviation of `ln|sin(φ/2)|` inside the integral.
    pub integration_variable_dev: f64,
    /// Largest absolute deviation of the log frozen at `ln|sin(ω/2)|`.
    pub frozen_log_dev: f64,
}

pub fn select_y_variant(spec: &QuadratureSpec) -> Result<YVariantSelection> {
    let mut devs = [0.0f64; 2];
    for (slot, kind) in [AuxKind::YGamma, AuxKind::YGammaFrozenLog].into_iter().enumerate() {
        for &w in &Y_SELECTION_OMEGAS {
            for positive in [true, false] {
                let g = if positive { 0.5 } else { -0.5 };
                let q = integrate_aux(kind, g, w, spec)?;
                let c = aux_half_closed(positive, w).y_gamma;
                devs[slot] = devs[slot].max((q - c).abs());
            }
        }
    }
    Ok(YVariantSelection {
        chosen: if devs[0] <= devs[1] {
            AuxKind::YGamma
        } else {
            AuxKind::YGammaFrozenLog
        },
        integration_variable_dev: devs[0],
        frozen_log_dev: devs[1],
    })
}

/// How the separated group is combined with the Born term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeparatedReading {
    /// `1/sin²(ω/2) − E / (sin(ω/2) cos(ω/2))`; agrees with the series.
    Reconstructed,
    /// `E / sin²(ω/2)`, the literal reading.
    AsPrinted,
}

/// The group `E(γ, ω)`, which equals `2γ S(γ, ω)`.
pub fn separated_group(gamma: f64, omega: f64, aux: &SingularitySeparatedAux) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let gw = gamma * omega;
    let (sgw, cgw) = gw.sin_cos();
    let ln_s = (0.5 * omega).sin().ln();
    let cot_gpi = 1.0 / (gamma * PI).tan();
    PI * gamma * cgw + gamma * (2.0 * gw).sin() * ln_s
        - 2.0 * PI * gamma * aux.c_gamma * cot_gpi * sgw
        - gamma * cgw * aux.x_gamma
        - 2.0 * gamma * gamma * sgw * aux.y_gamma
}

pub fn separated_bracket_with_aux(
    gamma: f64,
    omega: f64,
    aux: &SingularitySeparatedAux,
    reading: SeparatedReading,
) -> f64 {
    let s = (0.5 * omega).sin();
    let e = separated_group(gamma, omega, aux);
    match reading {
        SeparatedReading::Reconstructed => 1.0 / (s * s) - e / (s * (0.5 * omega).cos()),
        SeparatedReading::AsPrinted => e / (s * s),
    }
}

pub fn separated_bracket(gamma: f64, omega: f64, reading: SeparatedReading) -> Result<f64> {
    if omega == 0.0 {
        return Err(TMatrixError::ForwardSingularity);
    }
    let aux = aux_integrals(gamma, omega)?;
    Ok(separated_bracket_with_aux(gamma, omega, &aux, reading))
}

/// Singularity-separated form, checked pointwise against the series.
pub fn tmatrix_separated(state: &EnergyState, point: &FockPoint) -> Result<EvalResult> {
    let gamma = state.gamma();
    check_separated_gamma(gamma)?;
    let omega = check_point(point)?;
    // only the correction has the removable 0/0 at the backward point
    let (correction, extra_err, extrapolated) = if gamma == 0.0 {
        (0.0, 0.0, false)
    } else {
        backward_safe(omega, |w| {
            let aux = aux_integrals(gamma, w)?;
            let (s, c) = (0.5 * w).sin_cos();
            Ok(separated_group(gamma, w, &aux) / (s * c))
        })?
    };
    let bracket = 1.0 / point.sin2_half_omega() - correction;
    let reference = series::series_bracket(gamma, omega, &SeriesOptions::default())?.value;
    let dev = (bracket - reference).abs() / reference.abs();
    let validation = if dev <= VALIDATION_THRESHOLD {
        ValidationStatus::Confirmed { max_rel_dev: dev }
    } else {
        ValidationStatus::Discrepant {
            max_rel_dev: dev,
            omega_at_max: omega,
        }
    };
    let mut warnings = Vec::new();
    if extrapolated {
        warnings.push(Warning::BackwardExtrapolated);
    }
    let prefactor = point.prefactor(state);
    let quad_err = 1e-11 * (1.0 + gamma.abs()).powi(2) / (0.5 * omega).sin().powi(2);
    Ok(EvalResult::new(
        Representation::Separated,
        prefactor,
        bracket,
        Diagnostics {
            terms_used: None,
            abs_err_est: prefactor.abs() * (quad_err + extra_err),
            warnings,
            validation: Some(validation),
        },
    ))
}

/// Bracket from the finite rational-γ sum.
pub fn rational_bracket(gamma: RationalGamma, omega: f64) -> Result<f64> {
    let s = (0.5 * omega).sin();
    let sum = series::rational_sum(gamma, omega)?;
    Ok(1.0 / (s * s) - 4.0 * gamma.value() / omega.sin() * sum)
}

/// T-matrix through the finite sum; γ must be rational with a small denominator.
pub fn tmatrix_rational(state: &EnergyState, point: &FockPoint) -> Result<EvalResult> {
    let gamma = state.gamma();
    let omega = check_point(point)?;
    let prefactor = point.prefactor(state);
    if gamma == 0.0 {
        let born = 1.0 / point.sin2_half_omega();
        return Ok(EvalResult::new(
            Representation::Rational,
            prefactor,
            born,
            Diagnostics {
                terms_used: Some(0),
                abs_err_est: 4.0 * f64::EPSILON * (prefactor * born).abs(),
                ..Diagnostics::default()
            },
        ));
    }
    let r = RationalGamma::from_f64(gamma, crate::eval::RATIONAL_MAX_DENOMINATOR)
        .ok_or(TMatrixError::NotRational(gamma))?;
    let (bracket, extra_err, extrapolated) = backward_safe(omega, |w| rational_bracket(r, w))?;
    let mut warnings = Vec::new();
    if let Some(w) = series::pole_warning(gamma) {
        warnings.push(w);
    }
    if extrapolated {
        warnings.push(Warning::BackwardExtrapolated);
    }
    let terms = r.denominator() as usize + (r.numerator() / r.denominator()) as usize;
    let cancellation = 1.0 / point.sin2_half_omega() + 4.0 * gamma.abs() * r.denominator() as f64;
    Ok(EvalResult::new(
        Representation::Rational,
        prefactor,
        bracket,
        Diagnostics {
            terms_used: Some(terms),
            abs_err_est: prefactor.abs() * (64.0 * f64::EPSILON * cancellation + extra_err),
            warnings,
            validation: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_b(g: f64, w: f64) -> f64 {
        series::series_bracket(g, w, &SeriesOptions::default()).unwrap().value
    }

    #[test]
    fn ids_cover_all_signed_forms() {
        let values: Vec<f64> = ClosedFormId::ALL.iter().map(|id| id.value()).collect();
        assert_eq!(
            values,
            vec![0.5, -0.5, 1.5, -1.5, 2.5, -2.5, 3.5, -3.5, 1.0 / 3.0, -1.0 / 3.0, 0.25, -0.25]
        );
        for id in ClosedFormId::ALL {
            assert_eq!(ClosedFormId::from_gamma(id.value()), Some(id));
        }
        assert_eq!(ClosedFormId::from_gamma(0.3), None);
        assert_eq!(ClosedFormId::from_gamma(4.5), None);
    }

    #[test]
    fn neville_reproduces_polynomials() {
        let hs = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06];
        let vals: Vec<f64> = hs.iter().map(|h| 3.0 - 2.0 * h + 5.0 * h * h * h).collect();
        let (v, _) = neville_at_zero(&hs, &vals);
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn verified_forms_match_series() {
        for id in ClosedFormId::ALL {
            for &w in &[0.1, 0.7, 1.6, 2.4, 3.0] {
                let a = explicit_bracket(id, FormVariant::Verified, w);
                let b = series_b(id.value(), w);
                assert!((a - b).abs() <= 1e-10 * b.abs(), "{id} ω={w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn printed_discrepancies_are_the_expected_ones() {
        let grid = standard_omega_grid();
        let opts = SeriesOptions::default();
        for id in ClosedFormId::ALL {
            let st = validate_form(id, FormVariant::Printed, &grid, VALIDATION_THRESHOLD, &opts).unwrap();
            let expect_bad = matches!(
                (id.family(), id.is_negative()),
                (ClosedFormFamily::Half, true) | (ClosedFormFamily::ThreeHalves, _) | (ClosedFormFamily::Third, _)
            );
            assert_eq!(!st.is_confirmed(), expect_bad, "{id}: {st:?}");
        }
    }

    #[test]
    fn backward_extrapolation_matches_series_limit() {
        for id in ClosedFormId::ALL {
            let (v, err, ex) = backward_safe(PI, |w| Ok(explicit_bracket(id, FormVariant::Verified, w))).unwrap();
            assert!(ex);
            let lim = series::backward_bracket_limit(id.value(), &SeriesOptions::default())
                .unwrap()
                .value;
            assert!((v - lim).abs() <= 1e-9 * lim.abs(), "{id}: {v} vs {lim}, est {err}");
        }
    }

    #[test]
    fn half_aux_closed_forms_match_quadrature() {
        for &w in &[0.2, 1.0, 2.5] {
            for positive in [true, false] {
                let g = if positive { 0.5 } else { -0.5 };
                let q = aux_integrals(g, w).unwrap();
                let c = aux_half_closed(positive, w);
                assert!((q.x_gamma - c.x_gamma).abs() < 1e-12);
                assert!((q.y_gamma - c.y_gamma).abs() < 1e-12);
                assert!((q.c_gamma - c.c_gamma).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn separated_group_is_twice_gamma_times_sum() {
        for &(g, w) in &[(0.3, 1.0), (-0.7, 2.0), (2.5, 0.4), (-3.3, 2.9), (0.5, 1.3)] {
            let aux = aux_integrals(g, w).unwrap();
            let e = separated_group(g, w, &aux);
            let s = series::fock_sum(g, w, &SeriesOptions::default()).unwrap().value;
            assert!((e - 2.0 * g * s).abs() < 1e-10 * (1.0 + (2.0 * g * s).abs()), "{g} {w}");
        }
    }

    #[test]
    fn separated_rejects_integers_and_large_gamma() {
        assert_eq!(aux_integrals(2.0, 1.0), Err(TMatrixError::DegenerateGamma(2.0)));
        assert_eq!(aux_integrals(4.5, 1.0), Err(TMatrixError::GammaOutOfRange(4.5)));
    }

    #[test]
    fn rational_bracket_matches_series() {
        for &(neg, n, m) in &[(false, 2, 3), (true, 5, 7), (false, 9, 4), (true, 1, 5)] {
            let r = RationalGamma::new(neg, n, m).unwrap();
            for &w in &[0.3, 1.5, 2.8] {
                let a = rational_bracket(r, w).unwrap();
                let b = series_b(r.value(), w);
                assert!((a - b).abs() <= 1e-10 * b.abs(), "{r} {w}");
            }
        }
    }
}
