//! Fixtures shared by the benchmarks.

use coulomb_tmatrix::{make_fock_point, EnergyState, FockPoint, Result};

/// State and point with k = k' = κ = 1 at Fock angle ω.
pub fn sphere_point(gamma: f64, omega: f64) -> Result<(EnergyState, FockPoint)> {
    let state = EnergyState::dimensionless(1.0, gamma)?;
    let point = make_fock_point(&state, 1.0, 1.0, omega.cos())?;
    Ok((state, point))
}
