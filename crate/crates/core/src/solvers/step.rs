use nalgebra::DVector;

use crate::error::{dim_check, Error, Result};
use crate::operator::SensingOperator;
use crate::scalar::Real;

/// GAP step `θ + α Aᵀ(AAᵀ)⁻¹(y − Aθ)`.
pub fn gap_step<T: Real>(
    theta: &DVector<T>,
    y: &DVector<T>,
    alpha: T,
    op: &SensingOperator<T>,
) -> Result<DVector<T>> {
    dim_check("measurements", op.rows(), y.len())?;
    let residual = y - op.apply(theta)?;
    let correction = op.apply_pseudo_inverse(&residual)?;
    Ok(theta + correction * alpha)
}

/// AIT step `θ + α Aᵀ(y − Aθ)`.
pub fn ait_step<T: Real>(
    theta: &DVector<T>,
    y: &DVector<T>,
    alpha: T,
    op: &SensingOperator<T>,
) -> Result<DVector<T>> {
    dim_check("measurements", op.rows(), y.len())?;
    let residual = y - op.apply(theta)?;
    let correction = op.apply_adjoint(&residual)?;
    Ok(theta + correction * alpha)
}

/// Noise estimate `A(w_{t+1} − θ_t)/α` from consecutive GAP iterates.
pub fn estimate_noise<T: Real>(
    w_next: &DVector<T>,
    theta: &DVector<T>,
    alpha: T,
    op: &SensingOperator<T>,
) -> Result<DVector<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if w_next.len() != theta.len() {
        return Err(Error::Dimension(format!(
            "w has length {}, θ has length {}",
            w_next.len(),
            theta.len()
        )));
    }
    Ok(op.apply(&(w_next - theta))? / alpha)
}
