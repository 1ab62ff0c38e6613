use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::corpus::EventPair;
use crate::embeddings::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::eval::stats::pearson;
use crate::vae::{latent_diagnostics, train_with_schedule, Schedule, TrainConfig, TrainingLog, VaeState};

/// A Step-1-only β-VAE and the latent picked as its probability coordinate.
#[derive(Debug, Clone)]
pub struct AblatedModel {
    pub state: VaeState,
    pub log: TrainingLog,
    pub index: usize,
    /// Pair correlation of the selected latent.
    pub correlation: f64,
    /// Multiplies the selected latent before the sigmoid.
    pub sign: f64,
    /// No latent had a negative pair correlation.
    pub warning: bool,
}

/// Trains with Step 1 only on the pooled `e` and `¬e` embeddings, then picks the
/// latent whose means for `e` and `¬e` correlate most negatively.
pub fn train_ablated(dataset: &EmbeddingDataset, cfg: &TrainConfig) -> Result<AblatedModel> {
    let (state, log) = train_with_schedule(dataset, cfg, Schedule::Step1Only)?;
    let diag = latent_diagnostics(&state, dataset)?;
    let (index, correlation) = diag.most_negative();
    Ok(AblatedModel {
        state,
        log,
        index,
        correlation,
        sign: 1.0,
        warning: correlation >= 0.0,
    })
}

impl AblatedModel {
    pub fn recover_batch(&self, x: &crate::linalg::Matrix, cfg: &TrainConfig) -> Result<Vec<f64>> {
        self.state.recover_latent_batch(x, self.index, self.sign, cfg)
    }
}

/// `+1` or `-1`: the sign of the correlation between latent `index` of the
/// `e` embeddings and the true probabilities, over the pairs both inputs share.
///
/// The objective is symmetric under negating a latent, so this is the one bit
/// of supervision needed to put recovered probabilities on the right side of 0.5.
pub fn orientation_sign(
    state: &VaeState,
    dataset: &EmbeddingDataset,
    corpus: &[EventPair],
    index: usize,
) -> Result<f64> {
    let truth: BTreeMap<&str, f64> = corpus.iter().map(|p| (p.id.as_str(), p.p_true_f64())).collect();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (i, r) in dataset.records().iter().enumerate() {
        if let Some(&p) = truth.get(r.event_id.as_str()) {
            rows.push(i);
            targets.push(p);
        }
    }
    if rows.is_empty() {
        return Err(Error::IdMismatch(format!(
            "no embedding id appears in the {}-pair corpus",
            corpus.len()
        )));
    }
    let (mu, _) = state.encode_batch(&dataset.matrix(false))?;
    if index >= mu.cols() {
        return Err(Error::InvalidConfig(format!("latent index {index} out of range")));
    }
    let latent: Vec<f64> = rows.iter().map(|&i| mu[(i, index)]).collect();
    Ok(match pearson(&latent, &targets) {
        Ok(c) if c.r < 0.0 => -1.0,
        _ => 1.0,
    })
}
