//! The trigonometric series `S(γ, ω) = Σ_{n≥1} sin(nω)/(n+γ)` behind the
//! T-matrix, its finite closed forms at rational γ, and the series
//! representation of the T-matrix itself.
//!
//! The series converges only conditionally. The default path splits
//! `1/(n+γ) = 1/n − γ/(n(n+γ))`: the first part sums to `(π−ω)/2`, the
//! second converges absolutely and its tail is taken by repeated summation by
//! parts with exact finite differences. An independent path (raw partial sums
//! followed by iterated frequency-tuned means) is kept for cross-checks.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Result, TMatrixError};
use crate::eval::{Diagnostics, EvalResult, Representation, Warning};
use crate::kinematics::{EnergyState, FockPoint};

/// Number of summation-by-parts terms used for the tail.
const TAIL_ORDER: usize = 10;

/// Distance from a negative integer below which a pole warning is attached.
const POLE_WARNING_DISTANCE: f64 = 1e-6;

/// Below this distance from ω = π the T-matrix bracket is taken from its
/// backward limit (the correction is O((π−ω)²)).
const BACKWARD_LIMIT_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Acceleration {
    /// Decomposition plus summation-by-parts tail. Default.
    DirectPartialSums,
    /// Raw partial sums with iterated three-point means tuned to ω.
    AveragedTail,
    /// Decomposition with plain partial sums.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    max_terms: usize,
    target_rel_tol: f64,
    acceleration: Acceleration,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            max_terms: 1_000_000,
            target_rel_tol: 1e-10,
            acceleration: Acceleration::DirectPartialSums,
        }
    }
}

impl SeriesOptions {
    pub fn new(max_terms: usize, target_rel_tol: f64, acceleration: Acceleration) -> Result<Self> {
        if max_terms < 100 {
            return Err(TMatrixError::OutOfRange {
                what: "max_terms",
                value: max_terms as f64,
            });
        }
        if !(target_rel_tol >= 1e-14 && target_rel_tol.is_finite()) {
            return Err(TMatrixError::OutOfRange {
                what: "target_rel_tol",
                value: target_rel_tol,
            });
        }
        Ok(Self {
            max_terms,
            target_rel_tol,
            acceleration,
        })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn target_rel_tol(&self) -> f64 {
        self.target_rel_tol
    }

    pub fn acceleration(&self) -> Acceleration {
        self.acceleration
    }

    pub fn with_acceleration(mut self, acceleration: Acceleration) -> Self {
        self.acceleration = acceleration;
        self
    }
}

/// Result of a series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms_used: usize,
    pub abs_err_est: f64,
}

/// Exactly represented rational Coulomb parameter `±n/m` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalGamma {
    numerator: u32,
    denominator: u32,
    negative: bool,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl RationalGamma {
    pub fn new(negative: bool, numerator: u32, denominator: u32) -> Result<Self> {
        if numerator == 0 || denominator == 0 {
            return Err(TMatrixError::OutOfRange {
                what: "rational gamma numerator/denominator",
                value: 0.0,
            });
        }
        let g = gcd(numerator, denominator);
        Ok(Self {
            numerator: numerator / g,
            denominator: denominator / g,
            negative,
        })
    }

    pub fn positive(numerator: u32, denominator: u32) -> Result<Self> {
        Self::new(false, numerator, denominator)
    }

    pub fn negative(numerator: u32, denominator: u32) -> Result<Self> {
        Self::new(true, numerator, denominator)
    }

    /// Best rational approximation with denominator at most `max_denominator`,
    /// accepted only when it reproduces `x` to a few ulps.
    pub fn from_f64(x: f64, max_denominator: u32) -> Option<Self> {
        if !x.is_finite() || x == 0.0 {
            return None;
        }
        let target = x.abs();
        // Continued-fraction convergents.
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut r = target;
        for _ in 0..40 {
            let a = r.floor();
            if a > u32::MAX as f64 {
                return None;
            }
            let a = a as u64;
            let p2 = a * p1 + p0;
            let q2 = a * q1 + q0;
            if q2 > max_denominator as u64 || p2 > u32::MAX as u64 {
                break;
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let approx = p1 as f64 / q1 as f64;
            if (approx - target).abs() <= 8.0 * f64::EPSILON * target {
                return Self::new(x < 0.0, p1 as u32, q1 as u32).ok();
            }
            let frac = r - a as f64;
            if frac == 0.0 {
                break;
            }
            r = 1.0 / frac;
        }
        None
    }

    pub fn numerator(&self) -> u32 {
        self.numerator
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
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

    pub fn magnitude(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn value(&self) -> f64 {
        self.sign() * self.magnitude()
    }

    pub fn abs(&self) -> Self {
        Self {
            negative: false,
            ..*self
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            negative: !self.negative,
            ..*self
        }
    }

    pub fn is_negative_integer(&self) -> bool {
        self.negative && self.denominator == 1
    }
}

impl fmt::Display for RationalGamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { '-' } else { '+' };
        if self.denominator == 1 {
            write!(f, "{sign}{}", self.numerator)
        } else {
            write!(f, "{sign}{}/{}", self.numerator, self.denominator)
        }
    }
}

pub fn is_negative_integer(gamma: f64) -> bool {
    gamma < 0.0 && gamma.fract() == 0.0
}

fn check_pole(gamma: f64) -> Result<()> {
    if is_negative_integer(gamma) {
        Err(TMatrixError::BoundStatePole(gamma))
    } else if !gamma.is_finite() {
        Err(TMatrixError::OutOfRange {
            what: "gamma",
            value: gamma,
        })
    } else {
        Ok(())
    }
}

/// Distance to the nearest bound-state pole, if γ is negative.
pub fn pole_distance(gamma: f64) -> Option<f64> {
    if gamma >= -0.5 {
        return None;
    }
    Some((gamma - gamma.round()).abs())
}

pub(crate) fn pole_warning(gamma: f64) -> Option<Warning> {
    pole_distance(gamma)
        .filter(|&d| d < POLE_WARNING_DISTANCE)
        .map(|distance| Warning::NearBoundStatePole { distance })
}

/// Forward differences `Δ^i (1/(n+a))` at `x = n + a`, for `i < count`.
fn reciprocal_differences(x: f64, count: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(count);
    let mut cur = 1.0 / x;
    for i in 0..count {
        if i > 0 {
            cur *= -(i as f64) / (x + i as f64);
        }
        d.push(cur);
    }
    d
}

/// Forward differences of `g(n) = 1/(n(n+γ))` at `n`, by the Leibniz rule.
fn decomposed_term_differences(n: f64, gamma: f64, count: usize) -> Vec<f64> {
    let du = reciprocal_differences(n, count);
    let mut binom = vec![1.0f64; count];
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        // binom holds C(j, i) for i = 0..=j
        if j > 0 {
            for i in (1..j).rev() {
                binom[i] += binom[i - 1];
            }
            binom[j] = 1.0;
        }
        let mut acc = 0.0;
        for i in 0..=j {
            let dv = reciprocal_differences(n + i as f64 + gamma, j - i + 1);
            acc += binom[i] * du[i] * dv[j - i];
        }
        out.push(acc);
    }
    out
}

/// Summation-by-parts tail `Σ_{n≥M} g(n) zⁿ` from the forward differences of
/// `g` at `M`. Returns the tail and the magnitude of its last retained term.
fn abel_tail(diffs: &[f64], start: usize, omega: f64) -> (Complex64, f64) {
    let z = Complex64::from_polar(1.0, omega);
    let one_minus_z = Complex64::new(1.0, 0.0) - z;
    let mut zpow = Complex64::from_polar(1.0, start as f64 * omega);
    let mut denom = one_minus_z;
    let mut total = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for &d in diffs {
        let term = zpow * d / denom;
        total += term;
        last = term.norm();
        zpow *= z;
        denom *= one_minus_z;
    }
    (total, last)
}

/// `R = Σ_{n≥1} e^{inω} / (n(n+γ))` for `ω ∈ (0, π]`.
/// Returns (value, terms, truncation estimate).
fn decomposed_remainder(
    gamma: f64,
    omega: f64,
    opts: &SeriesOptions,
    tol_abs: impl Fn(f64) -> f64,
) -> Result<(Complex64, usize, f64)> {
    let gap = 2.0 * (0.5 * omega).sin();
    let order = TAIL_ORDER;
    let mut m = 16usize
        .max((2.0 * order as f64 / gap).ceil() as usize)
        .max(gamma.abs().ceil() as usize + order + 2);
    if m > opts.max_terms {
        m = opts.max_terms;
    }

    let mut direct = Complex64::new(0.0, 0.0);
    let mut next = 1usize;
    loop {
        while next < m {
            let n = next as f64;
            direct += Complex64::from_polar(1.0, n * omega) / (n * (n + gamma));
            next += 1;
        }
        let (tail, last) = abel_tail(
            &decomposed_term_differences(m as f64, gamma, order),
            m,
            omega,
        );
        let value = direct + tail;
        if last <= tol_abs(value.im) || m >= opts.max_terms {
            if last > tol_abs(value.im) {
                return Err(TMatrixError::ConvergenceFailure {
                    target: opts.target_rel_tol,
                    achieved: last,
                    max_terms: opts.max_terms,
                });
            }
            return Ok((value, m - 1, last));
        }
        m = (2 * m).min(opts.max_terms);
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega <= PI) {
        return Err(TMatrixError::OutOfRange {
            what: "omega",
            value: omega,
        });
    }
    Ok(())
}

/// `S(γ, ω) = Σ_{n≥1} sin(nω)/(n+γ)` for `ω ∈ (0, π]`.
pub fn fock_sum(gamma: f64, omega: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    check_pole(gamma)?;
    check_omega(omega)?;
    if omega == PI {
        // every term carries sin(nπ) = 0
        return Ok(SeriesValue {
            value: 0.0,
            terms_used: 0,
            abs_err_est: 0.0,
        });
    }
    match opts.acceleration {
        Acceleration::DirectPartialSums => fock_sum_decomposed(gamma, omega, opts),
        Acceleration::AveragedTail => fock_sum_averaged(gamma, omega, opts),
        Acceleration::None => fock_sum_plain(gamma, omega, opts),
    }
}

/// Scale used in relative tests; the floor keeps accidental zeros of S away
/// from ω = π from demanding unbounded work.
fn sum_scale(value: f64, omega: f64) -> f64 {
    value.abs().max(1e-8 * (PI - omega))
}

fn fock_sum_decomposed(gamma: f64, omega: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    let sawtooth = 0.5 * (PI - omega);
    if gamma == 0.0 {
        return Ok(SeriesValue {
            value: sawtooth,
            terms_used: 0,
            abs_err_est: f64::EPSILON * sawtooth,
        });
    }
    let tol = opts.target_rel_tol;
    let (r, terms, trunc) = decomposed_remainder(gamma, omega, opts, |im| {
        0.1 * tol * sum_scale(sawtooth - gamma * im, omega) / gamma.abs()
    })?;
    let value = sawtooth - gamma * r.im;
    Ok(SeriesValue {
        value,
        terms_used: terms,
        abs_err_est: gamma.abs() * trunc + 4.0 * f64::EPSILON * (sawtooth.abs() + value.abs()),
    })
}

fn fock_sum_plain(gamma: f64, omega: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    let sawtooth = 0.5 * (PI - omega);
    if gamma == 0.0 {
        return fock_sum_decomposed(gamma, omega, opts);
    }
    let gap = 2.0 * (0.5 * omega).sin();
    let mut acc = 0.0;
    let mut m = 1usize;
    let mut target = 1024usize.min(opts.max_terms);
    loop {
        while m <= target {
            let n = m as f64;
            acc += (n * omega).sin() / (n * (n + gamma));
            m += 1;
        }
        let value = sawtooth - gamma * acc;
        let n = target as f64 + 1.0;
        // leading summation-by-parts term bounds the oscillating tail
        let est = gamma.abs() / (n * (n + gamma)).abs() / gap;
        if est <= opts.target_rel_tol * sum_scale(value, omega) {
            return Ok(SeriesValue {
                value,
                terms_used: target,
                abs_err_est: est,
            });
        }
        if target >= opts.max_terms {
            return Err(TMatrixError::ConvergenceFailure {
                target: opts.target_rel_tol,
                achieved: est / sum_scale(value, omega),
                max_terms: opts.max_terms,
            });
        }
        target = (2 * target).min(opts.max_terms);
    }
}

/// Iterated means `(s_i − 2cos ω s_{i+1} + s_{i+2}) / (2 − 2cos ω)` annihilate
/// an oscillation of frequency ω riding on a slowly varying amplitude. At
/// ω = π this is two rounds of pairwise averaging.
fn tuned_means(partials: &[f64], omega: f64) -> (f64, f64) {
    let c = omega.cos();
    let norm = 2.0 - 2.0 * c;
    let mut level: Vec<f64> = partials.to_vec();
    let mut best = *level.last().unwrap();
    let mut best_err = f64::INFINITY;
    let mut prev = best;
    while level.len() >= 3 {
        level = level
            .windows(3)
            .map(|w| (w[0] - 2.0 * c * w[1] + w[2]) / norm)
            .collect();
        let cur = level[level.len() / 2];
        let err = (cur - prev).abs();
        if err < best_err {
            best_err = err;
            best = cur;
        } else {
            break;
        }
        prev = cur;
    }
    (best, best_err)
}

fn fock_sum_averaged(gamma: f64, omega: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    const LEVELS: usize = 8;
    let gap = 2.0 * (0.5 * omega).sin();
    let mut n0 = 64usize
        .max((4.0 * LEVELS as f64 / gap).ceil() as usize)
        .max(gamma.abs().ceil() as usize + 8);
    let mut acc = 0.0;
    let mut m = 1usize;
    loop {
        let end = n0 + 2 * LEVELS;
        if end > opts.max_terms {
            return Err(TMatrixError::ConvergenceFailure {
                target: opts.target_rel_tol,
                achieved: f64::NAN,
                max_terms: opts.max_terms,
            });
        }
        while m < n0 {
            let n = m as f64;
            acc += (n * omega).sin() / (n + gamma);
            m += 1;
        }
        // means are taken on the tail alone so the head's rounding is not amplified
        let mut partials = Vec::with_capacity(2 * LEVELS + 1);
        let mut s = 0.0;
        for i in 0..=2 * LEVELS {
            let n = (n0 + i) as f64;
            s += (n * omega).sin() / (n + gamma);
            partials.push(s);
        }
        let (tail, err) = tuned_means(&partials, omega);
        let value = acc + tail;
        if err <= opts.target_rel_tol * sum_scale(value, omega) {
            return Ok(SeriesValue {
                value,
                terms_used: end,
                abs_err_est: err,
            });
        }
        if end == opts.max_terms {
            return Err(TMatrixError::ConvergenceFailure {
                target: opts.target_rel_tol,
                achieved: err / sum_scale(value, omega),
                max_terms: opts.max_terms,
            });
        }
        n0 = (2 * n0).min(opts.max_terms - 2 * LEVELS);
    }
}

/// `Σ_{n≥1} sin(nω)/(n ± 1/2) = (π/2)cos(ω/2) ± sin(ω/2) ln|tan(ω/4)|`.
pub fn half_integer_sum(positive: bool, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let sign = if positive { 1.0 } else { -1.0 };
    let half = 0.5 * omega;
    Ok(0.5 * PI * half.cos() + sign * half.sin() * (0.25 * omega).tan().abs().ln())
}

/// Sine argument inside the logarithms of the rational-γ closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogArgument {
    /// `ln(2|sin((x + 2kπ)/(2m))|)`; agrees with the series.
    HalfAngle,
    /// `ln(2|sin((x + 2kπ)/m)|)`, the variant printed for n/m > 1.
    FullAngle,
}

/// Finite closed form of `S(γ, ω)` for rational `γ = ±n/m`.
pub fn rational_sum(gamma: RationalGamma, omega: f64) -> Result<f64> {
    rational_sum_with(gamma, omega, LogArgument::HalfAngle)
}

/// `S(±n/m, x) = Σ_{k<m} [sin(±nθ_k) ln(2 sin(θ_k/2)) − cos(nθ_k)(θ_k − π)/2]
///               ± Σ_{r=1}^{R} sin(rx)/(n/m − r)`, with `θ_k = (x + 2kπ)/m`,
/// `R = ⌊(n−1)/m⌋` for +n/m and `R = ⌊n/m⌋` for −n/m. The finite sum removes
/// the terms below the lattice start for +n/m and restores the
/// negative-denominator terms for −n/m.
pub fn rational_sum_with(gamma: RationalGamma, omega: f64, log_arg: LogArgument) -> Result<f64> {
    if gamma.is_negative_integer() {
        return Err(TMatrixError::BoundStatePole(gamma.value()));
    }
    if !(omega > 0.0 && omega < PI) {
        return Err(TMatrixError::OutOfRange {
            what: "omega",
            value: omega,
        });
    }
    let n = gamma.numerator() as f64;
    let m = gamma.denominator();
    let mf = m as f64;
    let sign = gamma.sign();
    let mut total = 0.0;
    for k in 0..m {
        let theta = (omega + 2.0 * PI * k as f64) / mf;
        let log_angle = match log_arg {
            LogArgument::HalfAngle => 0.5 * theta,
            LogArgument::FullAngle => theta,
        };
        let log_term = (2.0 * log_angle.sin().abs()).ln();
        total += sign * (n * theta).sin() * log_term - (n * theta).cos() * 0.5 * (theta - PI);
    }
    let a = gamma.magnitude();
    let upper = if gamma.is_negative() {
        gamma.numerator() / m
    } else {
        (gamma.numerator() - 1) / m
    };
    let mut finite = 0.0;
    for r in 1..=upper {
        let rf = r as f64;
        finite += (rf * omega).sin() / (a - rf);
    }
    Ok(total + sign * finite)
}

/// `B(π) = 1 − 2γ − 4γ² Σ_{n≥1} (−1)ⁿ/(n+γ)`, the ω → π limit of the bracket
/// `1/sin²(ω/2) − (4γ/sin ω) S(γ, ω)`.
pub fn backward_bracket_limit(gamma: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    check_pole(gamma)?;
    if gamma == 0.0 {
        return Ok(SeriesValue {
            value: 1.0,
            terms_used: 0,
            abs_err_est: 0.0,
        });
    }
    let tol = opts.target_rel_tol;
    let (r, terms, trunc) = decomposed_remainder(gamma, PI, opts, |_| 0.1 * tol / gamma.abs())?;
    // Σ(−1)ⁿ/(n+γ) = −ln 2 − γ Σ(−1)ⁿ/(n(n+γ))
    let alternating = -std::f64::consts::LN_2 - gamma * r.re;
    let value = 1.0 - 2.0 * gamma - 4.0 * gamma * gamma * alternating;
    Ok(SeriesValue {
        value,
        terms_used: terms,
        abs_err_est: 4.0 * gamma.abs().powi(3) * trunc + 8.0 * f64::EPSILON * value.abs().max(1.0),
    })
}

/// Bracket `1/sin²(ω/2) − (4γ/sin ω) S(γ, ω)` of the series representation.
pub fn series_bracket(gamma: f64, omega: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    check_pole(gamma)?;
    if omega == 0.0 {
        return Err(TMatrixError::ForwardSingularity);
    }
    check_omega(omega)?;
    let backward = PI - omega;
    if backward < BACKWARD_LIMIT_BAND {
        if opts.acceleration != Acceleration::DirectPartialSums {
            if backward == 0.0 {
                return Err(TMatrixError::BackwardIndeterminate);
            }
        } else {
            let mut lim = backward_bracket_limit(gamma, opts)?;
            lim.abs_err_est += backward * backward * (1.0 + gamma.abs()).powi(3);
            return Ok(lim);
        }
    }
    let s = fock_sum(gamma, omega, opts)?;
    let half = 0.5 * omega;
    let sin_half = half.sin();
    let factor = 4.0 * gamma / omega.sin();
    let value = 1.0 / (sin_half * sin_half) - factor * s.value;
    Ok(SeriesValue {
        value,
        terms_used: s.terms_used,
        abs_err_est: factor.abs() * s.abs_err_est + 4.0 * f64::EPSILON * value.abs(),
    })
}

/// Series representation of the T-matrix.
pub fn tmatrix_series(
    state: &EnergyState,
    point: &FockPoint,
    opts: &SeriesOptions,
) -> Result<EvalResult> {
    if point.is_forward() {
        return Err(TMatrixError::ForwardSingularity);
    }
    let gamma = state.gamma();
    let bracket = series_bracket(gamma, point.omega(), opts)?;
    let prefactor = point.prefactor(state);
    let mut diagnostics = Diagnostics {
        terms_used: Some(bracket.terms_used),
        abs_err_est: prefactor.abs() * bracket.abs_err_est,
        ..Diagnostics::default()
    };
    if let Some(w) = pole_warning(gamma) {
        diagnostics.warnings.push(w);
    }
    if PI - point.omega() < BACKWARD_LIMIT_BAND {
        diagnostics.warnings.push(Warning::BackwardLimit);
    }
    Ok(EvalResult::new(
        Representation::Series,
        prefactor,
        bracket.value,
        diagnostics,
    ))
}
