//! Coherence, similarity and binning metrics.

use alloc::vec::Vec;

use libm::sqrt;

use super::stats::{mean, sample_sd};
use crate::embeddings::EmbeddingDataset;
use crate::error::{ensure_len, Error, Result};
use crate::linalg::dot;

/// Bin count used when none is configured.
pub const DEFAULT_BINS: usize = 20;

/// `|p_a + p_not_a - 1|`.
pub fn incoherence(p_a: f64, p_not_a: f64) -> f64 {
    (p_a + p_not_a - 1.0).abs()
}

pub fn incoherence_all(p_a: &[f64], p_not_a: &[f64]) -> Result<Vec<f64>> {
    ensure_len("complement probabilities", p_a.len(), p_not_a.len())?;
    Ok(p_a.iter().zip(p_not_a).map(|(&a, &b)| incoherence(a, b)).collect())
}

pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    ensure_len("cosine operands", a.len(), b.len())?;
    let a: Vec<f64> = a.iter().map(|&v| f64::from(v)).collect();
    let b: Vec<f64> = b.iter().map(|&v| f64::from(v)).collect();
    let (na, nb) = (sqrt(dot(&a, &a)), sqrt(dot(&b, &b)));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("cosine of a zero vector"));
    }
    Ok(dot(&a, &b) / (na * nb))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CosineStats {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Cosine similarity between `e` and `e_neg` over every pair.
/// The SD is the sample SD, and 0 for a single pair.
pub fn cosine_pairs(dataset: &EmbeddingDataset) -> Result<CosineStats> {
    if dataset.is_empty() {
        return Err(Error::Empty("cosine over an empty dataset"));
    }
    let sims = dataset
        .records()
        .iter()
        .map(|r| cosine(&r.e, &r.e_neg))
        .collect::<Result<Vec<f64>>>()?;
    let sd = if sims.len() > 1 { sample_sd(&sims) } else { 0.0 };
    Ok(CosineStats {
        mean: mean(&sims),
        sd,
        n: sims.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinPoint {
    pub center: f64,
    pub mean: f64,
    /// Standard error of the bin mean; 0 for a bin holding one point.
    pub se: f64,
    pub count: usize,
}

/// Equal-width bins over `[min x, max x]`; the last bin is closed on the right
/// and empty bins are left out.
pub fn window_bin(x: &[f64], y: &[f64], n_bins: usize) -> Result<Vec<BinPoint>> {
    ensure_len("binned series", x.len(), y.len())?;
    if n_bins == 0 {
        return Err(Error::InvalidConfig("window_bin needs at least one bin".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("binned series"));
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let mut members: Vec<Vec<f64>> = alloc::vec![Vec::new(); n_bins];
    for (&xi, &yi) in x.iter().zip(y) {
        let b = if width > 0.0 {
            (((xi - lo) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        members[b].push(yi);
    }
    Ok(members
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(b, m)| {
            let se = if m.len() > 1 {
                sample_sd(m) / sqrt(m.len() as f64)
            } else {
                0.0
            };
            BinPoint {
                center: lo + (b as f64 + 0.5) * width,
                mean: mean(m),
                se,
                count: m.len(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::EmbeddingPair;
    use alloc::string::ToString;

    #[test]
    fn incoherence_examples() {
        assert!((incoherence(0.6, 0.6) - 0.2).abs() < 1e-15);
        assert_eq!(incoherence(0.3, 0.7), 0.0);
        assert_eq!(incoherence(1.0, 1.0), 1.0);
        assert_eq!(incoherence(0.2, 0.5), incoherence(0.5, 0.2));
    }

    fn dataset(pairs: &[([f32; 2], [f32; 2])]) -> EmbeddingDataset {
        let records = pairs
            .iter()
            .enumerate()
            .map(|(i, (e, n))| EmbeddingPair {
                event_id: i.to_string(),
                e: e.to_vec(),
                e_neg: n.to_vec(),
            })
            .collect();
        EmbeddingDataset::new(2, records).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let same = dataset(&[([1.0, 2.0], [1.0, 2.0]), ([3.0, -1.0], [3.0, -1.0])]);
        let s = cosine_pairs(&same).unwrap();
        assert!((s.mean - 1.0).abs() < 1e-15 && s.sd.abs() < 1e-15);
        let opposite = dataset(&[([1.0, 2.0], [-1.0, -2.0]), ([0.5, 0.0], [-0.5, 0.0])]);
        assert!((cosine_pairs(&opposite).unwrap().mean + 1.0).abs() < 1e-15);
        let orth = dataset(&[([1.0, 1.0], [1.0, -1.0]), ([0.0, 2.0], [3.0, 0.0])]);
        assert!(cosine_pairs(&orth).unwrap().mean.abs() < 1e-12);
        let zero = dataset(&[([0.0, 0.0], [1.0, 0.0])]);
        assert!(cosine_pairs(&zero).is_err());
    }

    #[test]
    fn single_bin_is_overall_mean() {
        let x = [0.1, 0.5, 0.9, 0.3];
        let y = [1.0, 2.0, 3.0, 6.0];
        let bins = window_bin(&x, &y, 1).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].mean, 3.0);
        assert_eq!(bins[0].count, 4);
        assert!((bins[0].center - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_bins() {
        // Range [0, 4], two bins of width 2: {0, 1} and {3, 4}; 2.5 sits in the second.
        let x = [0.0, 1.0, 2.5, 4.0];
        let y = [1.0, 3.0, 5.0, 9.0];
        let bins = window_bin(&x, &y, 2).unwrap();
        assert_eq!(bins.len(), 2);
        assert_eq!((bins[0].center, bins[0].mean, bins[0].count), (1.0, 2.0, 2));
        assert!((bins[0].se - 1.0).abs() < 1e-15);
        assert_eq!((bins[1].center, bins[1].mean, bins[1].count), (3.0, 7.0, 2));
        assert!((bins[1].se - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_bins_are_dropped_and_diagonal_holds() {
        let bins = window_bin(&[0.0, 10.0], &[0.0, 10.0], 5).unwrap();
        assert_eq!(bins.len(), 2);
        let x: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let bins = window_bin(&x, &x, 50).unwrap();
        let half = 0.5 / 50.0;
        assert!(bins.iter().all(|b| (b.mean - b.center).abs() <= half));
        assert!(window_bin(&[1.0], &[1.0, 2.0], 3).is_err());
        assert!(window_bin(&[1.0], &[1.0], 0).is_err());
        assert_eq!(window_bin(&[2.0, 2.0], &[1.0, 3.0], 4).unwrap()[0].mean, 2.0);
    }
}
