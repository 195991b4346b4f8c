//! Partial-wave projection `t_l(k, k′) = ½ ∫₋₁¹ P_l(cos θ) ⟨k|t|k′⟩ d(cos θ)`.
//!
//! The integral is carried out in the Fock angle ω rather than in cos θ.
//! `sin²(ω/2)` is linear in cos θ, so `d cos θ = −sin ω / (2η) dω`. The
//! Jacobian also cancels the `1/sin ω` of the series representation at the
//! backward end.

use crate::error::{Result, TMatrixError};
use crate::eval::{evaluate, EvalOptions, Representation};
use crate::kinematics::{make_fock_point, EnergyState};
use crate::series::{Acceleration, SeriesOptions};

use super::gauss_kronrod::{self, QuadValue};
use super::QuadratureSpec;

pub const MAX_PARTIAL_WAVE: u32 = 20;

/// Legendre polynomial by upward recurrence.
pub fn legendre(l: u32, x: f64) -> f64 {
    *legendre_all(l, x).last().unwrap()
}

/// `[P_0(x), …, P_lmax(x)]`.
pub fn legendre_all(lmax: u32, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax as usize + 1);
    p.push(1.0);
    if lmax >= 1 {
        p.push(x);
    }
    for l in 1..lmax as usize {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

pub fn project_partial_wave(
    l: u32,
    state: &EnergyState,
    k: f64,
    k_prime: f64,
    rep: Representation,
) -> Result<QuadValue> {
    project_partial_wave_with(
        l,
        state,
        k,
        k_prime,
        rep,
        &EvalOptions {
            series: SeriesOptions::new(1_000_000, 1e-12, Acceleration::DirectPartialSums)?,
            ..EvalOptions::default()
        },
        &QuadratureSpec::new(1e-300, 1e-11, 50, super::EndpointHandling::None)?,
    )
}

pub fn project_partial_wave_with(
    l: u32,
    state: &EnergyState,
    k: f64,
    k_prime: f64,
    rep: Representation,
    opts: &EvalOptions,
    spec: &QuadratureSpec,
) -> Result<QuadValue> {
    if l > MAX_PARTIAL_WAVE {
        return Err(TMatrixError::PartialWaveTooHigh(l));
    }
    // validates k, k' through the same path as every other evaluation
    make_fock_point(state, k, k_prime, 0.0)?;
    if (k - k_prime).abs() <= 1e-12 * k.max(k_prime) {
        return Err(TMatrixError::OnShellDiagonal);
    }

    let kappa_sq = state.kappa() * state.kappa();
    let denom = (k * k + kappa_sq) * (k_prime * k_prime + kappa_sq);
    let eta = 2.0 * kappa_sq * (k * k_prime) / denom;
    // sin²(ω/2) = base − η cos θ
    let base = kappa_sq * (k * k + k_prime * k_prime) / denom;
    let forward = kappa_sq * (k - k_prime).powi(2) / denom;
    let backward = (kappa_sq * (k + k_prime).powi(2) / denom).min(1.0);
    let omega_min = 2.0 * forward.sqrt().asin();
    let omega_max = 2.0 * backward.sqrt().asin();

    // geometric breakpoints cluster nodes at the forward peak
    let mut breaks = vec![omega_min];
    let mut b = 2.0 * omega_min;
    while b < omega_max {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(omega_max);

    let born_scale = (std::f64::consts::PI * state.charge_product() / (k * k_prime)
        * ((k + k_prime).powi(2) / (k - k_prime).powi(2)).ln())
    .abs();

    let integrand = |omega: f64| -> Result<f64> {
        let s2 = (0.5 * omega).sin().powi(2);
        let cos_theta = ((base - s2) / eta).clamp(-1.0, 1.0);
        let point = make_fock_point(state, k, k_prime, cos_theta)?;
        let t = evaluate(rep, state, &point, opts)?.value;
        let jacobian = omega.sin() / (2.0 * eta);
        Ok(0.5 * legendre(l, cos_theta) * t * jacobian)
    };
    // integrand values carry the relative noise of the representation
    let abs_tol = spec.abs_tol().max(1e-13 * born_scale);
    gauss_kronrod::adaptive(integrand, &breaks, abs_tol, spec.rel_tol(), spec.max_depth())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{make_energy_state, TwoBodySystem};

    #[test]
    fn legendre_low_orders() {
        for &x in &[-1.0, -0.3, 0.0, 0.5, 1.0] {
            let p = legendre_all(3, x);
            assert_eq!(p[0], 1.0);
            assert_eq!(p[1], x);
            assert!((p[2] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
            assert!((p[3] - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
        }
        assert!((legendre(20, 1.0) - 1.0).abs() < 1e-13);
        assert!((legendre(20, -1.0) - 1.0).abs() < 1e-13);
    }

    fn free_state() -> EnergyState {
        make_energy_state(TwoBodySystem::free_particle(1.0, 1.0).unwrap(), -0.5).unwrap()
    }

    #[test]
    fn born_s_wave_is_logarithmic() {
        let s = free_state();
        for &(k, kp) in &[(2.0, 0.5), (1.0, 1.1), (0.3, 3.0)] {
            let t0 = project_partial_wave(0, &s, k, kp, Representation::Born).unwrap();
            let exact = std::f64::consts::PI / (k * kp) * ((k + kp) / (k - kp)).powi(2).ln();
            assert!((t0.value - exact).abs() < 1e-10 * exact, "{k} {kp}");
        }
    }

    #[test]
    fn rejects_diagonal_and_high_l() {
        let s = free_state();
        assert_eq!(
            project_partial_wave(0, &s, 1.0, 1.0, Representation::Born),
            Err(TMatrixError::OnShellDiagonal)
        );
        assert_eq!(
            project_partial_wave(21, &s, 1.0, 2.0, Representation::Born),
            Err(TMatrixError::PartialWaveTooHigh(21))
        );
    }
}
