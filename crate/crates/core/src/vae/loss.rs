use alloc::vec;
use alloc::vec::Vec;

use libm::exp;

use super::{split_latent, TrainConfig, VaeState};
use crate::error::{ensure_len, Error, Result};
use crate::linalg::Matrix;

/// `[z₁, z₂, …, z_k] ↦ [−z₁, z₂, …, z_k]`.
pub fn flip_transform(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    if let Some(first) = out.first_mut() {
        *first = -*first;
    }
    out
}

/// Loss value, its two components, and gradients for both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    /// Batch mean of the summed squared error (before `recon_weight`).
    pub recon: f64,
    /// Batch mean KL (before `beta`).
    pub kl: f64,
    pub encoder_grads: Vec<f64>,
    pub decoder_grads: Vec<f64>,
}

enum KlAnchor<'a> {
    StandardNormal,
    /// Posterior means and log-variances of the frozen encoder.
    Frozen(&'a Matrix, &'a Matrix),
}

impl VaeState {
    /// Negative Step-1 bound on a batch: reconstruct each row of `batch`
    /// from a reparameterised sample, plus `beta` times `KL(q ‖ N(0, I))`.
    pub fn loss_step1(&self, batch: &Matrix, eps: &Matrix, cfg: &TrainConfig) -> Result<LossOutput> {
        self.pass(batch, batch, eps, false, KlAnchor::StandardNormal, cfg)
    }

    /// Negative Step-2 bound: decode the flipped sample of `input` against
    /// `target` (the complement), plus `beta` times `KL(q_φ ‖ q_φ₀)`.
    pub fn loss_step2(
        &self,
        input: &Matrix,
        target: &Matrix,
        eps: &Matrix,
        cfg: &TrainConfig,
    ) -> Result<LossOutput> {
        let frozen = self.frozen_encoder.as_ref().ok_or(Error::MissingSnapshot)?;
        let (mu0, lv0) = split_latent(&frozen.predict(input)?, self.latent_dim());
        self.pass(input, target, eps, true, KlAnchor::Frozen(&mu0, &lv0), cfg)
    }

    fn pass(
        &self,
        input: &Matrix,
        target: &Matrix,
        eps: &Matrix,
        flip: bool,
        anchor: KlAnchor<'_>,
        cfg: &TrainConfig,
    ) -> Result<LossOutput> {
        let n = input.rows();
        let k = self.latent_dim();
        if n == 0 {
            return Err(Error::Empty("loss batch"));
        }
        ensure_len("target rows", n, target.rows())?;
        ensure_len("target width", self.dim(), target.cols())?;
        ensure_len("noise rows", n, eps.rows())?;
        ensure_len("noise width", k, eps.cols())?;
        let inv_n = 1.0 / n as f64;

        let (enc_out, enc_cache) = self.encoder.forward(input)?;
        let mut z = Matrix::zeros(n, k);
        for i in 0..n {
            let row = enc_out.row(i);
            for j in 0..k {
                z[(i, j)] = row[j] + exp(0.5 * row[k + j]) * eps[(i, j)];
            }
            if flip {
                z[(i, 0)] = -z[(i, 0)];
            }
        }
        let (xhat, dec_cache) = self.decoder.forward(&z)?;

        let mut recon = 0.0;
        let mut d_xhat = Matrix::zeros(n, self.dim());
        let scale = 2.0 * cfg.recon_weight * inv_n;
        for ((g, a), b) in d_xhat
            .as_mut_slice()
            .iter_mut()
            .zip(xhat.as_slice())
            .zip(target.as_slice())
        {
            let r = a - b;
            recon += r * r;
            *g = scale * r;
        }
        recon *= inv_n;

        let mut decoder_grads = vec![0.0; self.decoder.param_count()];
        let dz = self.decoder.backward_into(&dec_cache, &d_xhat, &mut decoder_grads)?;

        let mut kl = 0.0;
        let mut d_enc = Matrix::zeros(n, 2 * k);
        let kl_scale = cfg.beta * inv_n;
        for i in 0..n {
            let row = enc_out.row(i);
            for j in 0..k {
                let (mu, lv) = (row[j], row[k + j]);
                let sigma = exp(0.5 * lv);
                let mut g_z = dz[(i, j)];
                if flip && j == 0 {
                    g_z = -g_z;
                }
                let (kl_ij, g_mu, g_lv) = match anchor {
                    KlAnchor::StandardNormal => {
                        let var = sigma * sigma;
                        (0.5 * (mu * mu + var - 1.0 - lv), mu, 0.5 * (var - 1.0))
                    }
                    KlAnchor::Frozen(mu0, lv0) => {
                        let (m0, l0) = (mu0[(i, j)], lv0[(i, j)]);
                        let inv_var0 = exp(-l0);
                        let d = mu - m0;
                        let ratio = exp(lv - l0);
                        (
                            0.5 * (l0 - lv) + 0.5 * (ratio + d * d * inv_var0) - 0.5,
                            d * inv_var0,
                            0.5 * (ratio - 1.0),
                        )
                    }
                };
                kl += kl_ij;
                d_enc[(i, j)] = g_z + kl_scale * g_mu;
                d_enc[(i, k + j)] = g_z * eps[(i, j)] * 0.5 * sigma + kl_scale * g_lv;
            }
        }
        kl *= inv_n;

        let loss = cfg.recon_weight * recon + cfg.beta * kl;
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        let mut encoder_grads = vec![0.0; self.encoder.param_count()];
        self.encoder.backward_params(&enc_cache, &d_enc, &mut encoder_grads)?;
        Ok(LossOutput {
            loss,
            recon,
            kl,
            encoder_grads,
            decoder_grads,
        })
    }

    /// Applies one AdamW update from a loss evaluation.
    pub fn apply_gradients(&mut self, out: &LossOutput) -> Result<()> {
        self.encoder_opt
            .step(self.encoder.params_mut(), &out.encoder_grads)?;
        self.decoder_opt
            .step(self.decoder.params_mut(), &out.decoder_grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, AdamWConfig, DenseNet, LayerShape};

    #[test]
    fn flip_examples() {
        assert_eq!(flip_transform(&[1.0, 2.0, 3.0]), vec![-1.0, 2.0, 3.0]);
        assert_eq!(flip_transform(&flip_transform(&[0.3, -0.2])), vec![0.3, -0.2]);
        assert_eq!(flip_transform(&[0.0, 5.0]), vec![0.0, 5.0]);
    }

    /// Encoder `e ↦ (μ = e, log σ² = -100)`, decoder identity, k = d = 2.
    fn identity_state() -> VaeState {
        let mut enc = DenseNet::zeros(vec![LayerShape::new(2, 4, Activation::Identity)]).unwrap();
        enc.weight_mut(0).copy_from_slice(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        enc.bias_mut(0).copy_from_slice(&[0.0, 0.0, -100.0, -100.0]);
        let mut dec = DenseNet::zeros(vec![LayerShape::new(2, 2, Activation::Identity)]).unwrap();
        dec.weight_mut(0).copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        VaeState::from_nets(enc, dec, AdamWConfig::default()).unwrap()
    }

    #[test]
    fn perfect_reconstruction_without_kl_weight_is_zero_loss() {
        let s = identity_state();
        let cfg = TrainConfig {
            beta: 0.0,
            ..TrainConfig::default()
        };
        let x = Matrix::from_rows(&[[0.5, -1.0], [2.0, 0.25]]).unwrap();
        let eps = Matrix::from_rows(&[[0.3, -0.7], [1.1, 0.2]]).unwrap();
        let out = s.loss_step1(&x, &eps, &cfg).unwrap();
        assert!(out.loss < 1e-40, "{}", out.loss);
    }

    #[test]
    fn loss_is_at_least_reconstruction() {
        let s = identity_state();
        let cfg = TrainConfig::default();
        let x = Matrix::from_rows(&[[0.5, -1.0]]).unwrap();
        let eps = Matrix::from_rows(&[[0.3, -0.7]]).unwrap();
        let out = s.loss_step1(&x, &eps, &cfg).unwrap();
        assert!(out.kl >= 0.0);
        assert!(out.loss >= out.recon);
    }

    #[test]
    fn step2_needs_snapshot_and_is_anchored_at_it() {
        let mut s = identity_state();
        let cfg = TrainConfig::default();
        let x = Matrix::from_rows(&[[0.5, -1.0]]).unwrap();
        let eps = Matrix::from_rows(&[[0.3, -0.7]]).unwrap();
        assert_eq!(s.loss_step2(&x, &x, &eps, &cfg), Err(Error::MissingSnapshot));
        s.snapshot_encoder();
        let out = s.loss_step2(&x, &x, &eps, &cfg).unwrap();
        assert_eq!(out.kl, 0.0);
    }

    #[test]
    fn perfect_complement_predictor_has_zero_loss() {
        let mut s = identity_state();
        s.snapshot_encoder();
        let cfg = TrainConfig::default();
        // decode(flip(z)) = [-e1, e2], which is exactly the target below.
        let x = Matrix::from_rows(&[[0.5, -1.0], [-2.0, 3.0]]).unwrap();
        let target = Matrix::from_rows(&[[-0.5, -1.0], [2.0, 3.0]]).unwrap();
        let eps = Matrix::zeros(2, 2);
        let out = s.loss_step2(&x, &target, &eps, &cfg).unwrap();
        assert_eq!(out.loss, 0.0);
    }

    #[test]
    fn rejects_mismatched_batches() {
        let s = identity_state();
        let cfg = TrainConfig::default();
        let x = Matrix::zeros(2, 2);
        assert!(s.loss_step1(&x, &Matrix::zeros(3, 2), &cfg).is_err());
        assert!(s.loss_step1(&Matrix::zeros(0, 2), &Matrix::zeros(0, 2), &cfg).is_err());
    }
}
