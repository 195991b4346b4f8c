//! Off-energy-shell Coulomb T-matrix at negative energy.
//!
//! Momenta are mapped to the Fock angle ω by the stereographic projection, and
//! the T-matrix is written as `2π q₁q₂ η/(k k′) · B(γ, ω)`. The bracket `B` can
//! be computed from a trigonometric series, a one-dimensional integral,
//! explicit closed forms at special γ, a singularity-separated form, or a
//! finite sum at rational γ. [`evaluate`] dispatches between them.
//!
//! ```
//! use coulomb_tmatrix::{evaluate, make_energy_state, make_fock_point, EvalOptions,
//!     Representation, TwoBodySystem};
//!
//! let system = TwoBodySystem::natural(1.0).unwrap();
//! let state = make_energy_state(system, -0.5).unwrap();
//! let point = make_fock_point(&state, 2.0, 0.5, 0.3).unwrap();
//! let t = evaluate(Representation::Series, &state, &point, &EvalOptions::default()).unwrap();
//! assert!(t.value.is_finite());
//! ```

pub mod closed_forms;
pub mod error;
pub mod eval;
pub mod kinematics;
pub mod quadrature;
pub mod series;

pub use closed_forms::{
    aux_integrals, form_status, omega_grid, standard_omega_grid, tmatrix_explicit, tmatrix_half,
    tmatrix_rational, tmatrix_separated, ClosedFormFamily, ClosedFormId, FormVariant,
    SingularitySeparatedAux,
};
pub use error::{Result, TMatrixError};
pub use eval::{
    evaluate, Diagnostics, EvalOptions, EvalResult, Representation, ValidationStatus, Warning,
};
pub use kinematics::{
    born_term, coulomb_potential, make_energy_state, make_fock_point, transfer_momentum_sq,
    EnergyState, FockPoint, TwoBodySystem,
};
pub use quadrature::{
    project_partial_wave, schwinger_integral, tmatrix_schwinger, EndpointHandling, QuadValue,
    QuadratureSpec,
};
pub use series::{
    fock_sum, rational_sum, tmatrix_series, Acceleration, RationalGamma, SeriesOptions,
    SeriesValue,
};
