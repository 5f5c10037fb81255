//! Finite-difference gradient verification.

use crate::{Array, NumericsError, Result};

/// A scalar-valued differentiable map: evaluates f(x) and its analytic
/// gradient at x. The gradient path under test must be independent of the
/// central-difference probes.
pub trait ScalarMap {
    fn value(&self, x: &Array) -> Result<f64>;
    fn gradient(&self, x: &Array) -> Result<Array>;
}

/// Adapter for a closure returning (value, gradient).
pub struct ClosureMap<F>(pub F);

impl<F> ScalarMap for ClosureMap<F>
where
    F: Fn(&Array) -> Result<(f64, Array)>,
{
    fn value(&self, x: &Array) -> Result<f64> {
        Ok((self.0)(x)?.0)
    }

    fn gradient(&self, x: &Array) -> Result<Array> {
        Ok((self.0)(x)?.1)
    }
}

/// Max over coordinates of the relative error between the analytic gradient
/// and a central difference with step h, normalized by
/// max(1, |analytic|, |numeric|). Errors if any evaluation or gradient entry
/// is non-finite.
pub fn grad_check<M: ScalarMap>(map: &M, point: &Array, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(NumericsError::BadStep(h));
    }
    let analytic = map.gradient(point)?;
    if analytic.shape() != point.shape() {
        return Err(NumericsError::ShapeMismatch {
            context: "grad_check gradient".into(),
            left: point.shape().to_vec(),
            right: analytic.shape().to_vec(),
        });
    }
    if !analytic.is_finite() {
        return Err(NumericsError::NonFinite {
            context: "analytic gradient".into(),
        });
    }
    let mut worst = 0.0f64;
    let mut probe = point.clone();
    for i in 0..point.len() {
        let x0 = point.data()[i];
        probe.data_mut()[i] = x0 + h;
        let f_plus = map.value(&probe)?;
        probe.data_mut()[i] = x0 - h;
        let f_minus = map.value(&probe)?;
        probe.data_mut()[i] = x0;
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(NumericsError::NonFinite {
                context: format!("function value near coordinate {i}"),
            });
        }
        let numeric = (f_plus - f_minus) / (2.0 * h);
        let a = analytic.data()[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
