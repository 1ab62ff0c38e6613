use alloc::string::String;
use alloc::vec::Vec;

use super::VaeState;
use crate::embeddings::EmbeddingDataset;
use crate::error::Result;
use crate::eval::stats::pearson;
use crate::linalg::Matrix;

/// Posterior means and log-variances, two rows per pair:
/// row `2i` for `e` and row `2i + 1` for `¬e` of record `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentStats {
    pub event_ids: Vec<String>,
    pub mu: Matrix,
    pub logvar: Matrix,
}

impl LatentStats {
    pub fn pairs(&self) -> usize {
        self.event_ids.len()
    }

    /// `(μⱼ(e), μⱼ(¬e))` for every pair: the scatter behind one latent's panel.
    pub fn scatter(&self, j: usize) -> Vec<(f64, f64)> {
        (0..self.pairs())
            .map(|i| (self.mu[(2 * i, j)], self.mu[(2 * i + 1, j)]))
            .collect()
    }

    /// Means for the `e` side only, one row per pair.
    pub fn event_means(&self) -> Matrix {
        let k = self.mu.cols();
        let mut out = Matrix::zeros(self.pairs(), k);
        for i in 0..self.pairs() {
            out.row_mut(i).copy_from_slice(self.mu.row(2 * i));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentDiagnostics {
    pub stats: LatentStats,
    /// Pearson r between `μⱼ(e)` and `μⱼ(¬e)` across pairs; 0 where a side is constant.
    pub pair_correlation: Vec<f64>,
}

impl LatentDiagnostics {
    /// Index of the most negative pair correlation, ties to the lowest index.
    pub fn most_negative(&self) -> (usize, f64) {
        let mut best = (0, self.pair_correlation[0]);
        for (j, &r) in self.pair_correlation.iter().enumerate().skip(1) {
            if r < best.1 {
                best = (j, r);
            }
        }
        best
    }
}

pub fn latent_diagnostics(state: &VaeState, dataset: &EmbeddingDataset) -> Result<LatentDiagnostics> {
    let n = dataset.len();
    let k = state.latent_dim();
    let (mu_e, lv_e) = state.encode_batch(&dataset.matrix(false))?;
    let (mu_n, lv_n) = state.encode_batch(&dataset.matrix(true))?;
    let mut mu = Matrix::zeros(2 * n, k);
    let mut logvar = Matrix::zeros(2 * n, k);
    for i in 0..n {
        mu.row_mut(2 * i).copy_from_slice(mu_e.row(i));
        mu.row_mut(2 * i + 1).copy_from_slice(mu_n.row(i));
        logvar.row_mut(2 * i).copy_from_slice(lv_e.row(i));
        logvar.row_mut(2 * i + 1).copy_from_slice(lv_n.row(i));
    }
    let pair_correlation = (0..k)
        .map(|j| pearson(&mu_e.column(j), &mu_n.column(j)).map_or(0.0, |c| c.r))
        .collect();
    Ok(LatentDiagnostics {
        stats: LatentStats {
            event_ids: dataset.records().iter().map(|r| r.event_id.clone()).collect(),
            mu,
            logvar,
        },
        pair_correlation,
    })
}
