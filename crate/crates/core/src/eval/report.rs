//! Table-style report over every probability source and split.
//!
//! For reference, judged probabilities from the original instruct model
//! scored a train incoherence of 0.1297 (95% CI 0.1218 to 0.1376); nothing
//! here expects that value.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::metrics::{cosine_pairs, incoherence_all, window_bin, BinPoint, CosineStats, DEFAULT_BINS};
use super::stats::{mean_ci95, mse, paired_t, pearson, Correlation, TTest};
use crate::corpus::EventPair;
use crate::embeddings::EmbeddingDataset;
use crate::error::{ensure_len, Error, Result};
use crate::vae::LatentDiagnostics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Source {
    Judged,
    JudgedNormalized,
    Recovered,
    RecoveredAblated,
    ProbeLogit,
    ProbeDirect,
    True,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::Judged,
        Source::JudgedNormalized,
        Source::Recovered,
        Source::RecoveredAblated,
        Source::ProbeLogit,
        Source::ProbeDirect,
        Source::True,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Source::Judged => "judged",
            Source::JudgedNormalized => "judged_normalized",
            Source::Recovered => "recovered",
            Source::RecoveredAblated => "recovered_ablated",
            Source::ProbeLogit => "probe_logit",
            Source::ProbeDirect => "probe_direct",
            Source::True => "true",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Only the direct probe may leave `[0, 1]`.
    pub fn bounded(self) -> bool {
        self != Source::ProbeDirect
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub const ALL: [Split; 2] = [Split::Train, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Estimates `(P(A), P(¬A))` for each pair of one split.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbabilitySet {
    pub source: Source,
    pub split: Split,
    pub ids: Vec<String>,
    pub p: Vec<f64>,
    pub p_neg: Vec<f64>,
}

impl ProbabilitySet {
    pub fn new(source: Source, split: Split, ids: Vec<String>, p: Vec<f64>, p_neg: Vec<f64>) -> Result<Self> {
        let set = ProbabilitySet {
            source,
            split,
            ids,
            p,
            p_neg,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_len("probability ids", self.ids.len(), self.p.len())?;
        ensure_len("complement probabilities", self.ids.len(), self.p_neg.len())?;
        for &v in self.p.iter().chain(&self.p_neg) {
            if !v.is_finite() {
                return Err(Error::NonFinite("probability estimate"));
            }
            if self.source.bounded() && !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange(v));
            }
        }
        Ok(())
    }

    /// Ground truth for a corpus split.
    pub fn truth(split: Split, corpus: &[EventPair]) -> Self {
        ProbabilitySet {
            source: Source::True,
            split,
            ids: corpus.iter().map(|p| p.id.clone()).collect(),
            p: corpus.iter().map(EventPair::p_true_f64).collect(),
            p_neg: corpus.iter().map(|p| p.p_complement().to_f64()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceBlock {
    pub source: Source,
    pub split: Split,
    pub n: usize,
    pub incoherence_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Over both members of every pair; `None` when the estimates are constant.
    pub pearson: Option<Correlation>,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CompareMetric {
    /// Per-pair incoherence, `n - 1` dof.
    Incoherence,
    /// Per-event squared error against the truth, `2n - 1` dof.
    SquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    Tested(TTest),
    /// The two series do not differ anywhere, or only by a constant.
    Identical,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairedComparison {
    pub split: Split,
    pub a: Source,
    pub b: Source,
    pub metric: CompareMetric,
    pub outcome: Outcome,
}

/// Correlation between two sources' estimates over both members of every pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossCorrelation {
    pub split: Split,
    pub a: Source,
    pub b: Source,
    pub pearson: Option<Correlation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BinKind {
    /// x = P(A), y = P(¬A).
    Complement,
    /// x = true probability, y = estimate, both members of every pair.
    Accuracy,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinSeries {
    pub source: Source,
    pub split: Split,
    pub kind: BinKind,
    pub bins: Vec<BinPoint>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CosineEntry {
    pub split: Split,
    pub stats: CosineStats,
}

/// Latent means of `e` (x) against `¬e` (y) for one latent of one model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatentScatter {
    pub model: String,
    pub split: Split,
    pub latent: usize,
    pub pair_correlation: f64,
    pub points: Vec<[f64; 2]>,
}

impl LatentScatter {
    /// One series per latent, points ordered by event id.
    pub fn from_diagnostics(model: &str, split: Split, diag: &LatentDiagnostics) -> Vec<Self> {
        let mut order: Vec<usize> = (0..diag.stats.pairs()).collect();
        order.sort_by(|&a, &b| diag.stats.event_ids[a].cmp(&diag.stats.event_ids[b]));
        diag.pair_correlation
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let all = diag.stats.scatter(j);
                LatentScatter {
                    model: model.into(),
                    split,
                    latent: j,
                    pair_correlation: r,
                    points: order.iter().map(|&i| [all[i].0, all[i].1]).collect(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub blocks: Vec<SourceBlock>,
    pub comparisons: Vec<PairedComparison>,
    pub correlations: Vec<CrossCorrelation>,
    pub cosine: Vec<CosineEntry>,
    pub bins: Vec<BinSeries>,
    pub latents: Vec<LatentScatter>,
}

impl MetricsReport {
    pub fn block(&self, source: Source, split: Split) -> Option<&SourceBlock> {
        self.blocks.iter().find(|b| b.source == source && b.split == split)
    }

    pub fn comparison(&self, split: Split, a: Source, b: Source, metric: CompareMetric) -> Option<&PairedComparison> {
        self.comparisons
            .iter()
            .find(|c| c.split == split && c.a == a && c.b == b && c.metric == metric)
    }
}

/// Everything besides the probability sets that the report can include.
#[derive(Debug, Clone, Default)]
pub struct ReportExtras<'a> {
    pub datasets: Vec<(Split, &'a EmbeddingDataset)>,
    pub latents: Vec<LatentScatter>,
    /// Defaults to [`DEFAULT_BINS`].
    pub n_bins: Option<usize>,
}

/// Estimates aligned to the sorted ids of one corpus split.
struct Aligned {
    source: Source,
    p: Vec<f64>,
    p_neg: Vec<f64>,
}

impl Aligned {
    fn stacked(&self) -> Vec<f64> {
        self.p.iter().chain(&self.p_neg).copied().collect()
    }
}

fn align(set: &ProbabilitySet, ids: &[&str]) -> Result<Aligned> {
    set.validate()?;
    let mut by_id = BTreeMap::new();
    for (i, id) in set.ids.iter().enumerate() {
        if by_id.insert(id.as_str(), i).is_some() {
            return Err(Error::IdMismatch(format!("{} lists {id} twice", set.source.name())));
        }
    }
    if by_id.len() != ids.len() {
        return Err(Error::IdMismatch(format!(
            "{} {} has {} pairs, the corpus {}",
            set.source.name(),
            set.split.name(),
            by_id.len(),
            ids.len()
        )));
    }
    let mut p = Vec::with_capacity(ids.len());
    let mut p_neg = Vec::with_capacity(ids.len());
    for id in ids {
        let &i = by_id
            .get(id)
            .ok_or_else(|| Error::IdMismatch(format!("{} has no estimate for {id}", set.source.name())))?;
        p.push(set.p[i]);
        p_neg.push(set.p_neg[i]);
    }
    Ok(Aligned {
        source: set.source,
        p,
        p_neg,
    })
}

fn compare(a: &[f64], b: &[f64]) -> Result<Outcome> {
    match paired_t(a, b) {
        Ok(t) => Ok(Outcome::Tested(t)),
        Err(Error::Degenerate(_)) if a.len() >= 2 => Ok(Outcome::Identical),
        Err(e) => Err(e),
    }
}

fn correlation(x: &[f64], y: &[f64]) -> Result<Option<Correlation>> {
    match pearson(x, y) {
        Ok(c) => Ok(Some(c)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Builds every table cell, comparison and export series.
///
/// Sets may arrive in any order and with ids in any order; the result is
/// laid out by source, then split, with pairs sorted by id.
pub fn build_report(
    train: &[EventPair],
    test: &[EventPair],
    sets: &[ProbabilitySet],
    extras: &ReportExtras<'_>,
) -> Result<MetricsReport> {
    let n_bins = extras.n_bins.unwrap_or(DEFAULT_BINS);
    let mut report = MetricsReport {
        blocks: Vec::new(),
        comparisons: Vec::new(),
        correlations: Vec::new(),
        cosine: Vec::new(),
        bins: Vec::new(),
        latents: Vec::new(),
    };
    for split in Split::ALL {
        let corpus = match split {
            Split::Train => train,
            Split::Test => test,
        };
        let mut order: Vec<&EventPair> = corpus.iter().collect();
        order.sort_by(|a, b| a.id.cmp(&b.id));
        let ids: Vec<&str> = order.iter().map(|p| p.id.as_str()).collect();
        let truth: Vec<f64> = order
            .iter()
            .map(|p| p.p_true_f64())
            .chain(order.iter().map(|p| p.p_complement().to_f64()))
            .collect();

        let mut aligned = Vec::new();
        for source in Source::ALL {
            let mut matching = sets.iter().filter(|s| s.source == source && s.split == split);
            if let Some(set) = matching.next() {
                if matching.next().is_some() {
                    return Err(Error::IdMismatch(format!(
                        "two {} sets for the {} split",
                        source.name(),
                        split.name()
                    )));
                }
                aligned.push(align(set, &ids)?);
            }
        }

        let mut incoherences = Vec::with_capacity(aligned.len());
        let mut sq_errors = Vec::with_capacity(aligned.len());
        for a in &aligned {
            let inc = incoherence_all(&a.p, &a.p_neg)?;
            let ci = mean_ci95(&inc)?;
            let est = a.stacked();
            report.blocks.push(SourceBlock {
                source: a.source,
                split,
                n: ids.len(),
                incoherence_mean: ci.mean,
                ci_lo: ci.lo,
                ci_hi: ci.hi,
                pearson: correlation(&est, &truth)?,
                mse: mse(&est, &truth)?,
            });
            report.bins.push(BinSeries {
                source: a.source,
                split,
                kind: BinKind::Complement,
                bins: window_bin(&a.p, &a.p_neg, n_bins)?,
            });
            report.bins.push(BinSeries {
                source: a.source,
                split,
                kind: BinKind::Accuracy,
                bins: window_bin(&truth, &est, n_bins)?,
            });
            sq_errors.push(est.iter().zip(&truth).map(|(e, t)| (e - t) * (e - t)).collect::<Vec<f64>>());
            incoherences.push(inc);
        }

        for i in 0..aligned.len() {
            for j in i + 1..aligned.len() {
                let (a, b) = (aligned[i].source, aligned[j].source);
                for (metric, series) in [
                    (CompareMetric::Incoherence, &incoherences),
                    (CompareMetric::SquaredError, &sq_errors),
                ] {
                    report.comparisons.push(PairedComparison {
                        split,
                        a,
                        b,
                        metric,
                        outcome: compare(&series[i], &series[j])?,
                    });
                }
                report.correlations.push(CrossCorrelation {
                    split,
                    a,
                    b,
                    pearson: correlation(&aligned[i].stacked(), &aligned[j].stacked())?,
                });
            }
        }

        for (_, ds) in extras.datasets.iter().filter(|(s, _)| *s == split) {
            report.cosine.push(CosineEntry {
                split,
                stats: cosine_pairs(ds)?,
            });
        }
    }
    report.latents = extras.latents.clone();
    Ok(report)
}
