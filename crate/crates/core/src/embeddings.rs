//! Paired event/complement embeddings and the planted-factor generator.
//!
//! The synthetic generator plants the pair's log odds in factor 1 and
//! builds the complement's embedding from the same factors with factor 1
//! negated, then pushes both through a fixed nonlinear map.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{log, tanh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::EventPair;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPair {
    pub event_id: String,
    pub e: Vec<f32>,
    pub e_neg: Vec<f32>,
}

/// Validated collection of [`EmbeddingPair`]s sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    dim: usize,
    records: Vec<EmbeddingPair>,
}

impl EmbeddingDataset {
    /// Checks lengths, finiteness and id uniqueness.
    pub fn new(dim: usize, records: Vec<EmbeddingPair>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        let mut ids = BTreeSet::new();
        for r in &records {
            if r.e.len() != dim || r.e_neg.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "embedding record",
                    expected: dim,
                    found: if r.e.len() != dim { r.e.len() } else { r.e_neg.len() },
                });
            }
            if r.e.iter().chain(&r.e_neg).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("embedding record"));
            }
            if !ids.insert(r.event_id.as_str()) {
                return Err(Error::IdMismatch(format!("duplicate event id {}", r.event_id)));
            }
        }
        Ok(EmbeddingDataset { dim, records })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[EmbeddingPair] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EmbeddingPair> {
        self.records
    }

    pub fn get(&self, event_id: &str) -> Option<&EmbeddingPair> {
        self.records.iter().find(|r| r.event_id == event_id)
    }

    /// Records whose ids satisfy `keep`, in order.
    pub fn filter(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        EmbeddingDataset {
            dim: self.dim,
            records: self
                .records
                .iter()
                .filter(|r| keep(&r.event_id))
                .cloned()
                .collect(),
        }
    }

    /// `e` rows (when `complement` is false) or `e_neg` rows as an `f64` matrix.
    pub fn matrix(&self, complement: bool) -> Matrix {
        let mut data = Vec::with_capacity(self.records.len() * self.dim);
        for r in &self.records {
            let v = if complement { &r.e_neg } else { &r.e };
            data.extend(v.iter().map(|&x| f64::from(x)));
        }
        Matrix::from_vec(self.records.len(), self.dim, data).expect("shape checked at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticConfig {
    pub dim: usize,
    pub n_factors: usize,
    pub noise_std: f64,
    pub factor_scale: f64,
    pub generator_seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            dim: 256,
            n_factors: 6,
            noise_std: 0.01,
            factor_scale: 1.0,
            generator_seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_factors < 2 || self.n_factors > self.dim {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= n_factors <= dim, got n_factors={} dim={}",
                self.n_factors, self.dim
            )));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidConfig("noise_std must be finite and >= 0".into()));
        }
        if !self.factor_scale.is_finite() {
            return Err(Error::InvalidConfig("factor_scale must be finite".into()));
        }
        Ok(())
    }
}

pub const LOGIT_CLAMP: f64 = 8.0;

pub fn logit(p: f64) -> f64 {
    log(p / (1.0 - p))
}

/// The fixed map `G(f) = W2 tanh(W1 f + b1)` with hidden width `dim`.
#[derive(Debug, Clone)]
pub struct PlantedMap {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
}

impl PlantedMap {
    pub fn new(cfg: &SyntheticConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.generator_seed);
        let hidden = cfg.dim;
        let s1 = 1.0 / libm::sqrt(cfg.n_factors as f64);
        let s2 = 1.0 / libm::sqrt(hidden as f64);
        let mut normal = |scale: f64| scale * rng.sample::<f64, _>(StandardNormal);
        let w1 = Matrix::from_vec(
            hidden,
            cfg.n_factors,
            (0..hidden * cfg.n_factors).map(|_| normal(s1)).collect(),
        )
        .expect("sized above");
        let b1 = (0..hidden).map(|_| normal(0.25)).collect();
        let w2 = Matrix::from_vec(cfg.dim, hidden, (0..cfg.dim * hidden).map(|_| normal(s2)).collect())
            .expect("sized above");
        PlantedMap { w1, b1, w2 }
    }

    pub fn apply(&self, factors: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = (0..self.w1.rows())
            .map(|i| tanh(crate::linalg::dot(self.w1.row(i), factors) + self.b1[i]))
            .collect();
        (0..self.w2.rows())
            .map(|i| crate::linalg::dot(self.w2.row(i), &h))
            .collect()
    }
}

/// FNV-1a of the id, so each pair's draws do not depend on corpus order.
fn id_hash(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Planted factors of one pair: `[factor_scale * clamp(logit p), z_2, ..., z_n]`.
pub fn planted_factors(cfg: &SyntheticConfig, event_id: &str, p_true: f64) -> Result<Vec<f64>> {
    draw_factors(cfg, &mut pair_rng(cfg, event_id), p_true)
}

fn draw_factors(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng, p_true: f64) -> Result<Vec<f64>> {
    if !(p_true > 0.0 && p_true < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p_true));
    }
    let mut f = Vec::with_capacity(cfg.n_factors);
    f.push(cfg.factor_scale * logit(p_true).clamp(-LOGIT_CLAMP, LOGIT_CLAMP));
    f.extend((1..cfg.n_factors).map(|_| rng.sample::<f64, _>(StandardNormal)));
    Ok(f)
}

fn pair_rng(cfg: &SyntheticConfig, event_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.generator_seed.rotate_left(17) ^ id_hash(event_id))
}

pub fn generate_synthetic(corpus: &[EventPair], cfg: &SyntheticConfig) -> Result<EmbeddingDataset> {
    if corpus.is_empty() {
        return Err(Error::Empty("synthetic generation needs a corpus"));
    }
    cfg.validate()?;
    let map = PlantedMap::new(cfg);
    let mut records = Vec::with_capacity(corpus.len());
    for pair in corpus {
        let p = pair.p_true_f64();
        let mut rng = pair_rng(cfg, &pair.id);
        let factors = draw_factors(cfg, &mut rng, p)?;
        let mut flipped = factors.clone();
        flipped[0] = -flipped[0];
        let mut noisy = |v: Vec<f64>| -> Vec<f32> {
            v.into_iter()
                .map(|x| {
                    let eps = if cfg.noise_std > 0.0 {
                        cfg.noise_std * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    (x + eps) as f32
                })
                .collect()
        };
        let e = noisy(map.apply(&factors));
        let e_neg = noisy(map.apply(&flipped));
        records.push(EmbeddingPair {
            event_id: pair.id.clone(),
            e,
            e_neg,
        });
    }
    EmbeddingDataset::new(cfg.dim, records)
}
