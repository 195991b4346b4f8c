//! Numerical integration: the ρ-integral representation of the T-matrix, the
//! auxiliary angle integrals of the singularity-separated form, and the
//! partial-wave projection.

mod gauss_kronrod;
mod partial_wave;

use std::f64::consts::PI;

pub use gauss_kronrod::QuadValue;
pub use partial_wave::{legendre, legendre_all, project_partial_wave, project_partial_wave_with};

use crate::error::{Result, TMatrixError};
use crate::eval::{Diagnostics, EvalResult, Representation};
use crate::kinematics::{EnergyState, FockPoint};

/// How the integrand behaves at the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointHandling {
    None,
    /// The integrand is `(x − a)^γ g(x)` with `γ > −1`; the caller supplies
    /// `g` and the weight is removed by `x = a + (b − a) u^{1/(1+γ)}`.
    PowerWeight(f64),
    /// Logarithmic singularity at `a`, softened by `x = a + (b − a) t²`.
    LogEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
    endpoint_handling: EndpointHandling,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_depth: 50,
            endpoint_handling: EndpointHandling::None,
        }
    }
}

impl QuadratureSpec {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_depth: u32,
        endpoint_handling: EndpointHandling,
    ) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(TMatrixError::OutOfRange {
                what: "abs_tol",
                value: abs_tol,
            });
        }
        if !(rel_tol >= 1e-13) {
            return Err(TMatrixError::OutOfRange {
                what: "rel_tol",
                value: rel_tol,
            });
        }
        if max_depth == 0 || max_depth > 60 {
            return Err(TMatrixError::OutOfRange {
                what: "max_depth",
                value: max_depth as f64,
            });
        }
        if let EndpointHandling::PowerWeight(g) = endpoint_handling {
            if !(g > -1.0) {
                return Err(TMatrixError::NonIntegrable(g));
            }
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_depth,
            endpoint_handling,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn endpoint_handling(&self) -> EndpointHandling {
        self.endpoint_handling
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        self = Self::new(self.abs_tol, rel_tol, self.max_depth, self.endpoint_handling)?;
        Ok(self)
    }

    pub fn with_endpoint(mut self, endpoint_handling: EndpointHandling) -> Self {
        self.endpoint_handling = endpoint_handling;
        self
    }
}

/// Integrates `f` over `[a, b]` after the endpoint transform in `spec`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadValue>
where
    F: Fn(f64) -> f64,
{
    integrate_fallible(|x| Ok(f(x)), a, b, spec)
}

pub(crate) fn integrate_fallible<F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadValue>
where
    F: FnMut(f64) -> Result<f64>,
{
    let width = b - a;
    let run = |g: &mut dyn FnMut(f64) -> Result<f64>| {
        gauss_kronrod::adaptive(g, &[0.0, 1.0], spec.abs_tol, spec.rel_tol, spec.max_depth)
    };
    match spec.endpoint_handling {
        EndpointHandling::None => {
            gauss_kronrod::adaptive(f, &[a, b], spec.abs_tol, spec.rel_tol, spec.max_depth)
        }
        EndpointHandling::PowerWeight(gamma) => {
            if !(gamma > -1.0) {
                return Err(TMatrixError::NonIntegrable(gamma));
            }
            let p = 1.0 / (1.0 + gamma);
            let scale = width.abs().powf(gamma) * width * p;
            // ∫ (x−a)^γ g dx = (b−a)^{γ+1} p ∫₀¹ g(a + (b−a)u^p) du
            run(&mut |u| Ok(scale * f(a + width * u.powf(p))?))
        }
        EndpointHandling::LogEndpoint => run(&mut |t| Ok(2.0 * width * t * f(a + width * t * t)?)),
    }
}

/// `I(γ, ω) = ∫₀¹ ρ^γ / (ρ² − 2ρ cos ω + 1) dρ`, so that `sin ω · I = S(γ, ω)`.
pub fn schwinger_integral(gamma: f64, omega: f64) -> Result<QuadValue> {
    schwinger_integral_with(gamma, omega, &QuadratureSpec::default())
}

pub fn schwinger_integral_with(gamma: f64, omega: f64, spec: &QuadratureSpec) -> Result<QuadValue> {
    if !(gamma > -1.0) || !gamma.is_finite() {
        return Err(TMatrixError::NonIntegrable(gamma));
    }
    if !(omega > 0.0 && omega <= PI) {
        return Err(TMatrixError::OutOfRange {
            what: "omega",
            value: omega,
        });
    }
    // (1 − ρ)² + 2ρ(1 − cos ω) avoids cancellation at the ρ ≈ 1 peak
    let one_minus_c = 2.0 * (0.5 * omega).sin().powi(2);
    let kernel = move |rho: f64| {
        let d = 1.0 - rho;
        1.0 / (d * d + 2.0 * rho * one_minus_c)
    };
    let weighted = gamma < 0.0;
    let first = if weighted {
        spec.with_endpoint(EndpointHandling::PowerWeight(gamma))
    } else {
        spec.with_endpoint(EndpointHandling::None)
    };
    let plain = spec.with_endpoint(EndpointHandling::None);
    let full = |rho: f64| rho.powf(gamma) * kernel(rho);

    // The kernel peaks at ρ ≈ 1 with width ~ω; split there.
    let split = 1.0 - 2.0 * omega;
    let (head_end, tail) = if split > 0.0 { (split, true) } else { (1.0, false) };
    let mut head = if weighted {
        integrate(kernel, 0.0, head_end, &first)?
    } else {
        integrate(full, 0.0, head_end, &first)?
    };
    if tail {
        let t = integrate(full, split, 1.0, &plain)?;
        head.value += t.value;
        head.abs_err += t.abs_err;
        head.evaluations += t.evaluations;
    }
    Ok(head)
}

/// Integral representation of the T-matrix,
/// `prefactor · [1/sin²(ω/2) − 4γ I(γ, ω)]`, valid for `γ > −1`.
pub fn tmatrix_schwinger(
    state: &EnergyState,
    point: &FockPoint,
    spec: &QuadratureSpec,
) -> Result<EvalResult> {
    let gamma = state.gamma();
    if !(gamma > -1.0) {
        return Err(TMatrixError::AttractiveOutOfRange(gamma));
    }
    if point.is_forward() {
        return Err(TMatrixError::ForwardSingularity);
    }
    let prefactor = point.prefactor(state);
    let born = 1.0 / point.sin2_half_omega();
    let (bracket, err, evals) = if gamma == 0.0 {
        (born, 0.0, 0)
    } else {
        let i = schwinger_integral_with(gamma, point.omega(), spec)?;
        (born - 4.0 * gamma * i.value, 4.0 * gamma.abs() * i.abs_err, i.evaluations)
    };
    Ok(EvalResult::new(
        Representation::Schwinger,
        prefactor,
        bracket,
        Diagnostics {
            terms_used: Some(evals),
            abs_err_est: prefactor.abs() * (err + 4.0 * f64::EPSILON * bracket.abs()),
            ..Diagnostics::default()
        },
    ))
}

const AUX_ABS_TOL_FLOOR: f64 = 1e-14;

/// Which auxiliary angle integral to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuxKind {
    /// `x_γ(ω) = ∫₀^ω sin(γφ) cot(φ/2) dφ`
    XGamma,
    /// `y_γ(ω) = ∫_ω^π sin(γφ) ln|sin(φ/2)| dφ`
    YGamma,
    /// `ln|sin(ω/2)| ∫_ω^π sin(γφ) dφ`: the logarithm frozen at the lower
    /// limit. Kept only to show it does not reproduce the γ = ±1/2 values.
    YGammaFrozenLog,
}

pub fn integrate_aux(
    kind: AuxKind,
    gamma: f64,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(0.0..=PI).contains(&omega) {
        return Err(TMatrixError::OutOfRange {
            what: "omega",
            value: omega,
        });
    }
    // the angle integrals are O(1) but may pass through zero
    let spec = &QuadratureSpec {
        abs_tol: spec.abs_tol.max(AUX_ABS_TOL_FLOOR),
        ..*spec
    };
    let plain = spec.with_endpoint(EndpointHandling::None);
    match kind {
        AuxKind::XGamma => {
            if omega == 0.0 {
                return Ok(0.0);
            }
            let f = |phi: f64| {
                if phi == 0.0 {
                    2.0 * gamma
                } else {
                    let h = 0.5 * phi;
                    (gamma * phi).sin() * h.cos() / h.sin()
                }
            };
            Ok(integrate(f, 0.0, omega, &plain)?.value)
        }
        AuxKind::YGamma => {
            if omega == PI {
                return Ok(0.0);
            }
            let f = |phi: f64| (gamma * phi).sin() * (0.5 * phi).sin().abs().ln();
            let s = if omega < 1e-3 {
                spec.with_endpoint(EndpointHandling::LogEndpoint)
            } else {
                plain
            };
            Ok(integrate(f, omega, PI, &s)?.value)
        }
        AuxKind::YGammaFrozenLog => {
            if omega == PI {
                return Ok(0.0);
            }
            let log = (0.5 * omega).sin().abs().ln();
            let inner = integrate(|phi: f64| (gamma * phi).sin(), omega, PI, &plain)?.value;
            Ok(log * inner)
        }
    }
}
