//! Bias-corrected Adam.

use crate::{NumericsError, Parameter, Result};

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> AdamConfig {
        AdamConfig {
            lr,
            ..AdamConfig::default()
        }
    }
}

/// One Adam update on a single parameter from its accumulated gradient.
/// Increments the step count and clears the gradient.
pub fn adam_step(p: &mut Parameter, cfg: &AdamConfig) -> Result<()> {
    if !p.trainable {
        return Err(NumericsError::NotTrainable(p.name.clone()));
    }
    if p.gradient.shape() != p.value.shape() {
        return Err(NumericsError::ShapeMismatch {
            context: format!("adam_step on `{}`", p.name),
            left: p.value.shape().to_vec(),
            right: p.gradient.shape().to_vec(),
        });
    }
    p.step_count += 1;
    let t = p.step_count as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let g = p.gradient.data_mut();
    let m = p.adam_m.data_mut();
    let v = p.adam_v.data_mut();
    let w = p.value.data_mut();
    for i in 0..w.len() {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        w[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        g[i] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Array;

    fn scalar_param(value: f64, grad: f64) -> Parameter {
        let mut p = Parameter::new("p", Array::scalar(value).unwrap(), true);
        p.gradient.data_mut()[0] = grad;
        p
    }

    #[test]
    fn zero_gradient_is_identity_on_values() {
        let mut p = scalar_param(0.7, 0.0);
        for _ in 0..25 {
            adam_step(&mut p, &AdamConfig::default()).unwrap();
        }
        assert_eq!(p.value.data()[0], 0.7);
        assert_eq!(p.adam_m.data()[0], 0.0);
        assert_eq!(p.adam_v.data()[0], 0.0);
        assert_eq!(p.step_count, 25);
    }

    #[test]
    fn first_step_matches_hand_derivation() {
        // theta = 0, g = 1, lr = 0.1: m_hat = v_hat = 1, update = lr/(1+eps).
        let mut p = scalar_param(0.0, 1.0);
        let cfg = AdamConfig {
            lr: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        };
        adam_step(&mut p, &cfg).unwrap();
        assert!((p.value.data()[0] + 0.1).abs() < 1e-8);
        assert_eq!(p.gradient.data()[0], 0.0, "gradient cleared");
        assert_eq!(p.step_count, 1);
    }

    #[test]
    fn identical_state_identical_update() {
        let mut a = scalar_param(0.25, -0.3);
        let mut b = scalar_param(0.25, -0.3);
        let cfg = AdamConfig::default();
        for _ in 0..5 {
            a.gradient.data_mut()[0] = -0.3;
            b.gradient.data_mut()[0] = -0.3;
            adam_step(&mut a, &cfg).unwrap();
            adam_step(&mut b, &cfg).unwrap();
            assert_eq!(a.value.data()[0], b.value.data()[0]);
        }
    }

    #[test]
    fn non_trainable_rejected() {
        let mut p = scalar_param(0.0, 1.0);
        p.trainable = false;
        assert!(matches!(
            adam_step(&mut p, &AdamConfig::default()),
            Err(NumericsError::NotTrainable(_))
        ));
        assert_eq!(p.step_count, 0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = scalar_param(0.0, 1.0);
        p.gradient = Array::zeros(&[2]);
        assert!(matches!(
            adam_step(&mut p, &AdamConfig::default()),
            Err(NumericsError::ShapeMismatch { .. })
        ));
    }
}
