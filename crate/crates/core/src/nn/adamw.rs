use alloc::vec;
use alloc::vec::Vec;

use libm::{pow, sqrt};

use crate::error::{ensure_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

/// Moment estimates for one parameter buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamWConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl OptimizerState {
    pub fn new(len: usize, config: AdamWConfig) -> Self {
        OptimizerState {
            config,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    pub fn reset_moments(&mut self) {
        self.m.iter_mut().for_each(|x| *x = 0.0);
        self.v.iter_mut().for_each(|x| *x = 0.0);
        self.t = 0;
    }

    /// One AdamW step with decoupled weight decay:
    /// `p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        ensure_len("optimizer parameters", self.m.len(), params.len())?;
        ensure_len("optimizer gradients", self.m.len(), grads.len())?;
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let AdamWConfig {
            lr,
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.config;
        self.t += 1;
        let t = self.t as f64;
        let c1 = 1.0 - pow(beta1, t);
        let c2 = 1.0 - pow(beta2, t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * *p);
        }
        Ok(())
    }
}

pub fn adamw_update(params: &mut [f64], grads: &[f64], state: &mut OptimizerState) -> Result<()> {
    state.step(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lr: f64, wd: f64) -> AdamWConfig {
        AdamWConfig {
            lr,
            weight_decay: wd,
            ..AdamWConfig::default()
        }
    }

    #[test]
    fn zero_gradient_without_decay_is_a_no_op() {
        let mut p = [1.5, -2.0, 0.25];
        let mut st = OptimizerState::new(3, cfg(0.1, 0.0));
        for _ in 0..5 {
            adamw_update(&mut p, &[0.0; 3], &mut st).unwrap();
        }
        assert_eq!(p, [1.5, -2.0, 0.25]);
    }

    #[test]
    fn single_step_hand_oracle() {
        // m = 0.1, v = 0.001; bias correction gives m_hat = v_hat = 1.
        let mut p = [1.0];
        let mut st = OptimizerState::new(1, cfg(0.1, 0.0));
        adamw_update(&mut p, &[1.0], &mut st).unwrap();
        assert!((p[0] - (1.0 - 0.1 / (1.0 + 1e-8))).abs() < 1e-15);
        assert!((p[0] - 0.9).abs() < 1e-8);
        assert_eq!(st.steps(), 1);
    }

    #[test]
    fn pure_decay_step() {
        let mut p = [2.0];
        let mut st = OptimizerState::new(1, cfg(0.1, 0.1));
        adamw_update(&mut p, &[3.0], &mut st).unwrap();
        st.reset_moments();
        let before = p[0];
        adamw_update(&mut p, &[0.0], &mut st).unwrap();
        assert!((p[0] - before * (1.0 - 0.01)).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_gradients_without_touching_state() {
        let mut p = [1.0, 2.0];
        let mut st = OptimizerState::new(2, cfg(0.1, 0.0));
        let err = adamw_update(&mut p, &[f64::NAN, 0.0], &mut st).unwrap_err();
        assert_eq!(err, Error::NonFinite("gradient"));
        assert_eq!(p, [1.0, 2.0]);
        assert_eq!(st.steps(), 0);
        assert!(adamw_update(&mut p, &[1.0], &mut st).is_err());
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let mut p = [0.0; 4];
        let mut st = OptimizerState::new(4, AdamWConfig::default());
        for i in 0..20 {
            let g = [i as f64 - 10.0, -3.0, 0.5, 1e-3];
            adamw_update(&mut p, &g, &mut st).unwrap();
        }
        assert!(st.second_moment().iter().all(|&v| v >= 0.0));
    }
}
