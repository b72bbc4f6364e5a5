//! Reference parameter sets.

use crate::error::Result;
use crate::model::{LevyModel, PhaseTypeLaw};
use crate::scalar::Real;

/// Six-phase Coxian approximation of the Weibull(2, 1) law (mean ≈ 0.876),
/// fitted to its density and first three moments.
pub fn weibull_stand_in<T: Real>() -> Result<PhaseTypeLaw<T>> {
    let rates = [6.216903, 8.185388, 3.217177, 4.598766, 10.685064, 14.174839];
    let cont = [1.0, 0.936318, 0.844087, 1.0, 1.0];
    PhaseTypeLaw::coxian(&rates.map(T::lit), &cont.map(T::lit))
}

/// Brownian motion with drift 1 and variance 2.
pub fn brownian_reference<T: Real>() -> Result<LevyModel<T>> {
    LevyModel::brownian(T::one(), T::lit(2.0).sqrt())
}

/// `σ = 0.2`, `κ = 1`, Weibull-like jumps, drift `gamma_tilde`.
pub fn phase_type_reference<T: Real>(gamma_tilde: T) -> Result<LevyModel<T>> {
    LevyModel::new(gamma_tilde, T::lit(0.2), T::one(), Some(weibull_stand_in()?))
}
