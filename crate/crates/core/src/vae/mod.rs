//! Two-step constrained VAE.
//!
//! Step 1 is a β-VAE on single embeddings. Step 2 encodes `e`, negates the
//! first latent coordinate, and decodes the complement embedding `¬e`, with
//! the KL term anchored to a frozen snapshot of the encoder taken at the
//! start of each Step-2 phase. Training alternates the two phases every
//! `interleave_period` episodes; the first latent mean, scaled by the
//! temperature and passed through a sigmoid, is the recovered probability.

mod diagnostics;
mod loss;
mod train;

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

pub use diagnostics::{latent_diagnostics, LatentDiagnostics, LatentStats};
pub use loss::{flip_transform, LossOutput};
pub use train::{train, train_with_schedule, LogEntry, Phase, Schedule, TrainingLog};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::Matrix;
use crate::nn::{Activation, AdamWConfig, DenseNet, GaussianLatent, OptimizerState};

/// How the temperature enters the recovered probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TemperatureMode {
    /// `sigmoid(τ · μ₁)`
    #[default]
    Multiply,
    /// `sigmoid(μ₁ / τ)`
    Divide,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub beta: f64,
    pub temperature: f64,
    pub temperature_mode: TemperatureMode,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub latent_dim: usize,
    /// Width of the two hidden layers of each network; `None` means the embedding dimension.
    pub hidden_width: Option<usize>,
    pub interleave_period: usize,
    pub max_episodes: usize,
    pub seed: u64,
    pub recon_weight: f64,
    /// Zero drops Step 2 from the schedule entirely (the ablated β-VAE).
    pub step2_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta: 5.0,
            temperature: 5.0,
            temperature_mode: TemperatureMode::Multiply,
            learning_rate: 1e-4,
            weight_decay: AdamWConfig::default().weight_decay,
            batch_size: 128,
            latent_dim: 10,
            hidden_width: None,
            interleave_period: 10,
            max_episodes: 20_000,
            seed: 0,
            recon_weight: 1.0,
            step2_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad("beta must be positive");
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return bad("temperature must be positive");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be positive");
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return bad("weight_decay must be >= 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if self.interleave_period == 0 {
            return bad("interleave_period must be >= 1");
        }
        if self.latent_dim == 0 {
            return bad("latent_dim must be >= 1");
        }
        if self.hidden_width == Some(0) {
            return bad("hidden_width must be >= 1");
        }
        if !(self.recon_weight >= 0.0) || !(self.step2_weight >= 0.0) {
            return bad("loss weights must be >= 0");
        }
        Ok(())
    }

    pub fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            lr: self.learning_rate,
            weight_decay: self.weight_decay,
            ..AdamWConfig::default()
        }
    }

    /// Log odds to probability under the configured temperature.
    pub fn to_probability(&self, latent: f64) -> f64 {
        let scaled = match self.temperature_mode {
            TemperatureMode::Multiply => self.temperature * latent,
            TemperatureMode::Divide => latent / self.temperature,
        };
        sigmoid(scaled)
    }
}

/// Logistic function, evaluated on the side that avoids overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Encoder `ℝᵈ → (μ, log σ²) ∈ ℝ²ᵏ`, decoder `ℝᵏ → ℝᵈ`, the frozen
/// encoder snapshot, and one AdamW state per network.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeState {
    pub encoder: DenseNet,
    pub decoder: DenseNet,
    pub frozen_encoder: Option<DenseNet>,
    pub encoder_opt: OptimizerState,
    pub decoder_opt: OptimizerState,
}

impl VaeState {
    /// Three-layer GELU encoder and decoder with Glorot initialisation.
    pub fn init<R: Rng + ?Sized>(
        dim: usize,
        latent_dim: usize,
        hidden: usize,
        adamw: AdamWConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let encoder = DenseNet::mlp(&[dim, hidden, hidden, 2 * latent_dim], Activation::Gelu, rng)?;
        let decoder = DenseNet::mlp(&[latent_dim, hidden, hidden, dim], Activation::Gelu, rng)?;
        Self::from_nets(encoder, decoder, adamw)
    }

    /// Wraps existing networks; the encoder must emit `2k` values for a `k`-input decoder.
    pub fn from_nets(encoder: DenseNet, decoder: DenseNet, adamw: AdamWConfig) -> Result<Self> {
        ensure_len("encoder output (2 x latent)", 2 * decoder.input_dim(), encoder.output_dim())?;
        ensure_len("decoder output", encoder.input_dim(), decoder.output_dim())?;
        Ok(VaeState {
            encoder_opt: OptimizerState::new(encoder.param_count(), adamw),
            decoder_opt: OptimizerState::new(decoder.param_count(), adamw),
            encoder,
            decoder,
            frozen_encoder: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.decoder.input_dim()
    }

    /// `φ₀ ← φ`.
    pub fn snapshot_encoder(&mut self) {
        self.frozen_encoder = Some(self.encoder.clone());
    }

    /// Posterior for one embedding.
    pub fn encode(&self, e: &[f64]) -> Result<GaussianLatent> {
        ensure_len("embedding", self.dim(), e.len())?;
        let x = Matrix::from_vec(1, e.len(), e.to_vec())?;
        let (mu, logvar) = split_latent(&self.encoder.predict(&x)?, self.latent_dim());
        GaussianLatent::new(mu.into_vec(), logvar.into_vec())
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        ensure_len("latent", self.latent_dim(), z.len())?;
        let x = Matrix::from_vec(1, z.len(), z.to_vec())?;
        Ok(self.decoder.predict(&x)?.into_vec())
    }

    /// Posterior means and log-variances for a batch, each `n × k`.
    pub fn encode_batch(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        Ok(split_latent(&self.encoder.predict(x)?, self.latent_dim()))
    }

    /// `decode(μ(e))`, the evaluation-time reconstruction.
    pub fn reconstruct_batch(&self, x: &Matrix) -> Result<Matrix> {
        let (mu, _) = self.encode_batch(x)?;
        self.decoder.predict(&mu)
    }

    /// Mean over rows of the squared reconstruction error summed over dimensions.
    pub fn reconstruction_error(&self, x: &Matrix) -> Result<f64> {
        let xhat = self.reconstruct_batch(x)?;
        let total: f64 = xhat
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(total / x.rows() as f64)
    }

    /// Recovered probability from the first latent mean; no sampling.
    pub fn recover_probability(&self, e: &[f64], cfg: &TrainConfig) -> Result<f64> {
        Ok(cfg.to_probability(self.encode(e)?.mu[0]))
    }

    pub fn recover_batch(&self, x: &Matrix, cfg: &TrainConfig) -> Result<Vec<f64>> {
        self.recover_latent_batch(x, 0, 1.0, cfg)
    }

    /// Probability read from latent `index`, multiplied by `sign` first.
    pub fn recover_latent_batch(
        &self,
        x: &Matrix,
        index: usize,
        sign: f64,
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>> {
        if index >= self.latent_dim() {
            return Err(Error::InvalidConfig(format!(
                "latent index {index} out of range for k = {}",
                self.latent_dim()
            )));
        }
        let (mu, _) = self.encode_batch(x)?;
        Ok((0..mu.rows())
            .map(|i| cfg.to_probability(sign * mu[(i, index)]))
            .collect())
    }
}

/// Splits encoder output rows `[μ | log σ²]`.
pub(crate) fn split_latent(out: &Matrix, k: usize) -> (Matrix, Matrix) {
    let n = out.rows();
    let mut mu = Matrix::zeros(n, k);
    let mut logvar = Matrix::zeros(n, k);
    for i in 0..n {
        mu.row_mut(i).copy_from_slice(&out.row(i)[..k]);
        logvar.row_mut(i).copy_from_slice(&out.row(i)[k..]);
    }
    (mu, logvar)
}
