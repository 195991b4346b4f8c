//! Physical inputs to Fock-sphere variables.
//!
//! A two-body pair at negative energy `E = -ħ²κ²/2μ` is described by the
//! bound-state momentum κ and the Sommerfeld parameter `γ = μ q₁q₂ / (ħ² κ)`.
//! A pair of relative momenta (k, k′) at angle θ is mapped by stereographic
//! projection onto the unit 4-sphere, where it becomes the great-circle angle
//! ω and the weight η. Every T-matrix representation in this crate consumes
//! only (γ, ω, η) plus the prefactor `2π q₁q₂ η / (k k′)`.

use std::f64::consts::PI;

use crate::error::{Result, TMatrixError};

/// Physical constants of the interacting pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBodySystem {
    reduced_mass: f64,
    charge_product: f64,
    hbar: f64,
    free: bool,
}

impl TwoBodySystem {
    /// Physical mode: all three constants explicit.
    pub fn new(reduced_mass: f64, charge_product: f64, hbar: f64) -> Result<Self> {
        if !(reduced_mass > 0.0 && reduced_mass.is_finite()) {
            return Err(TMatrixError::InvalidSystem(format!(
                "reduced mass must be positive, got {reduced_mass}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(TMatrixError::InvalidSystem(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        if charge_product == 0.0 || !charge_product.is_finite() {
            return Err(TMatrixError::InvalidSystem(format!(
                "charge product must be finite and nonzero, got {charge_product} \
                 (use TwoBodySystem::free_particle for the Born limit)"
            )));
        }
        Ok(Self {
            reduced_mass,
            charge_product,
            hbar,
            free: false,
        })
    }

    /// Natural units, `μ = ħ = 1`.
    pub fn natural(charge_product: f64) -> Result<Self> {
        Self::new(1.0, charge_product, 1.0)
    }

    /// Free-particle test mode: the interaction parameter is switched off
    /// (γ = 0) while the prefactor keeps a unit charge product, so every
    /// representation collapses onto the Born term.
    pub fn free_particle(reduced_mass: f64, hbar: f64) -> Result<Self> {
        let mut sys = Self::new(reduced_mass, 1.0, hbar)?;
        sys.free = true;
        Ok(sys)
    }

    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }

    pub fn charge_product(&self) -> f64 {
        self.charge_product
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    /// Energy corresponding to bound-state momentum `kappa`.
    pub fn energy_from_kappa(&self, kappa: f64) -> f64 {
        -(self.hbar * kappa).powi(2) / (2.0 * self.reduced_mass)
    }
}

/// Negative energy together with its derived κ and γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyState {
    system: TwoBodySystem,
    energy: f64,
    kappa: f64,
    gamma: f64,
    gamma_overridden: bool,
}

impl EnergyState {
    pub fn system(&self) -> &TwoBodySystem {
        &self.system
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn charge_product(&self) -> f64 {
        self.system.charge_product
    }

    /// True when γ was supplied directly instead of derived from the constants.
    pub fn gamma_overridden(&self) -> bool {
        self.gamma_overridden
    }

    /// Replaces γ while keeping the physical constants (and thus the prefactor).
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(TMatrixError::OutOfRange {
                what: "gamma",
                value: gamma,
            });
        }
        self.gamma = gamma;
        self.gamma_overridden = true;
        Ok(self)
    }

    /// Dimensionless mode: `μ = ħ = 1`, unit charge product carrying the sign
    /// of γ, and γ taken as given. Values are then per unit |q₁q₂|.
    pub fn dimensionless(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(TMatrixError::OutOfRange {
                what: "kappa",
                value: kappa,
            });
        }
        let sign = if gamma < 0.0 { -1.0 } else { 1.0 };
        let system = TwoBodySystem::natural(sign)?;
        let state = make_energy_state(system, system.energy_from_kappa(kappa))?;
        state.with_gamma(gamma)
    }
}

/// Builds the energy state: `κ = √(−2μE)/ħ`, `γ = μ q₁q₂ / (ħ² κ)`.
pub fn make_energy_state(system: TwoBodySystem, energy: f64) -> Result<EnergyState> {
    if energy.is_nan() || energy >= 0.0 {
        return Err(TMatrixError::NonNegativeEnergy(energy));
    }
    if !energy.is_finite() {
        return Err(TMatrixError::OutOfRange {
            what: "energy",
            value: energy,
        });
    }
    let kappa = (-2.0 * system.reduced_mass * energy).sqrt() / system.hbar;
    let gamma = if system.free {
        0.0
    } else {
        system.reduced_mass * system.charge_product / (system.hbar * system.hbar * kappa)
    };
    Ok(EnergyState {
        system,
        energy,
        kappa,
        gamma,
        gamma_overridden: false,
    })
}

/// A momentum configuration (k, k′, cos θ) and its image on the Fock sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockPoint {
    k: f64,
    k_prime: f64,
    cos_theta: f64,
    omega: f64,
    eta: f64,
    sin2_half: f64,
    transfer_sq: f64,
}

impl FockPoint {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    /// Great-circle angle on the unit 4-sphere, in `[0, π]`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `sin²(ω/2)`, kept directly so the forward region does not lose digits
    /// through the inverse sine.
    pub fn sin2_half_omega(&self) -> f64 {
        self.sin2_half
    }

    /// `|k − k′|²`.
    pub fn transfer_sq(&self) -> f64 {
        self.transfer_sq
    }

    pub fn is_forward(&self) -> bool {
        self.sin2_half == 0.0
    }

    /// Common prefactor `2π q₁q₂ η / (k k′)` of every representation.
    pub fn prefactor(&self, state: &EnergyState) -> f64 {
        2.0 * PI * state.charge_product() * self.eta / (self.k * self.k_prime)
    }
}

/// `|k − k′|²` written as a sum of two non-negative terms.
pub fn transfer_momentum_sq(k: f64, k_prime: f64, cos_theta: f64) -> f64 {
    let dk = k - k_prime;
    dk * dk + 2.0 * (k * k_prime) * (1.0 - cos_theta)
}

pub fn make_fock_point(
    state: &EnergyState,
    k: f64,
    k_prime: f64,
    cos_theta: f64,
) -> Result<FockPoint> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(TMatrixError::OutOfRange {
            what: "k",
            value: k,
        });
    }
    if !(k_prime > 0.0 && k_prime.is_finite()) {
        return Err(TMatrixError::OutOfRange {
            what: "k_prime",
            value: k_prime,
        });
    }
    if !(-1.0..=1.0).contains(&cos_theta) {
        return Err(TMatrixError::OutOfRange {
            what: "cos_theta",
            value: cos_theta,
        });
    }
    let kappa_sq = state.kappa * state.kappa;
    let denom = (k * k + kappa_sq) * (k_prime * k_prime + kappa_sq);
    let transfer_sq = transfer_momentum_sq(k, k_prime, cos_theta);
    let mut sin2_half = kappa_sq * transfer_sq / denom;
    if sin2_half > 1.0 {
        if sin2_half > 1.0 + 4.0 * f64::EPSILON {
            return Err(TMatrixError::Internal(format!(
                "sin^2(omega/2) = {sin2_half} exceeds 1 beyond rounding"
            )));
        }
        sin2_half = 1.0;
    }
    let omega = 2.0 * sin2_half.sqrt().asin();
    let eta = 2.0 * kappa_sq * (k * k_prime) / denom;
    Ok(FockPoint {
        k,
        k_prime,
        cos_theta,
        omega,
        eta,
        sin2_half,
        transfer_sq,
    })
}

/// Momentum-space Coulomb potential `4π q₁q₂ / |k − k′|²`.
pub fn coulomb_potential(system: &TwoBodySystem, k: f64, k_prime: f64, cos_theta: f64) -> f64 {
    4.0 * PI * system.charge_product() / transfer_momentum_sq(k, k_prime, cos_theta)
}

/// First-order (Born) term computed from the Fock variables:
/// `2π q₁q₂ η / (k k′ sin²(ω/2))`.
pub fn born_term(state: &EnergyState, point: &FockPoint) -> Result<f64> {
    if point.is_forward() {
        return Err(TMatrixError::ForwardSingularity);
    }
    Ok(point.prefactor(state) / point.sin2_half)
}
