//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::tensor::{Scalar, Tensor};

/// Optimizer hyperparameters. Defaults: lr 1e−3, β 0.9/0.999, ε 1e−8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Per-parameter first/second moment estimates plus the shared step count.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    cfg: AdamConfig,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> AdamState<T> {
    /// Zero-moment state for parameters of the given shapes.
    pub fn new(cfg: AdamConfig, shapes: &[&[usize]]) -> Self {
        AdamState {
            cfg,
            step: 0,
            m: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            v: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One Adam update over all parameters, in the order `new` saw them.
    ///
    /// Rejects non-finite gradients rather than silently corrupting moments.
    pub fn step(&mut self, params: &mut [&mut Tensor<T>], grads: &[&Tensor<T>]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch(format!(
                "optimizer tracks {} parameters, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (idx, g) in grads.iter().enumerate() {
            if !g.all_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite gradient for parameter {idx}"
                )));
            }
        }
        self.step += 1;
        let b1 = T::from_f64(self.cfg.beta1);
        let b2 = T::from_f64(self.cfg.beta2);
        let lr = T::from_f64(self.cfg.learning_rate);
        let eps = T::from_f64(self.cfg.epsilon);
        // bias-corrected step size folds both corrections into one scalar
        let c1 = T::ONE - T::from_f64(self.cfg.beta1.powi(self.step as i32));
        let c2 = T::ONE - T::from_f64(self.cfg.beta2.powi(self.step as i32));
        for ((p, g), (m, v)) in
            params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            debug_assert_eq!(p.shape(), g.shape());
            let (pd, gd) = (p.data_mut(), g.data());
            let (md, vd) = (m.data_mut(), v.data_mut());
            for i in 0..pd.len() {
                let gi = gd[i];
                md[i] = b1 * md[i] + (T::ONE - b1) * gi;
                vd[i] = b2 * vd[i] + (T::ONE - b2) * gi * gi;
                let m_hat = md[i] / c1;
                let v_hat = vd[i] / c2;
                pd[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut p = Tensor::new(&[2], vec![1.0f64, -2.0]).unwrap();
        let before = p.clone();
        let mut state = AdamState::new(AdamConfig::default(), &[&[2]]);
        for _ in 0..5 {
            let g = Tensor::zeros(&[2]);
            state.step(&mut [&mut p], &[&g]).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_about_lr_times_sign() {
        // with bias correction, step 1 gives m̂=g, v̂=g², so Δ ≈ lr·sign(g)
        let mut p = Tensor::new(&[1], vec![0.0f64]).unwrap();
        let g = Tensor::new(&[1], vec![1.0f64]).unwrap();
        let mut state = AdamState::new(AdamConfig::default(), &[&[1]]);
        state.step(&mut [&mut p], &[&g]).unwrap();
        let delta = -p.data()[0];
        assert!((delta - 1e-3).abs() < 1e-6, "first step was {delta}");
    }

    #[test]
    fn identical_states_give_identical_results() {
        let run = || {
            let mut p = Tensor::new(&[3], vec![0.5f64, -0.25, 2.0]).unwrap();
            let mut state = AdamState::new(AdamConfig::default(), &[&[3]]);
            for k in 0..10 {
                let g = Tensor::from_fn(&[3], |i| ((i + k) as f64 * 0.3).sin());
                state.step(&mut [&mut p], &[&g]).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut p = Tensor::new(&[1], vec![1.0f64]).unwrap();
        let g = Tensor::new(&[1], vec![f64::NAN]).unwrap();
        let mut state = AdamState::new(AdamConfig::default(), &[&[1]]);
        let err = state.step(&mut [&mut p], &[&g]).unwrap_err();
        assert!(err.to_string().contains("non-finite gradient"));
        assert_eq!(p.data()[0], 1.0, "parameter must be untouched after a rejected step");
    }
}
