//! Metrics, statistics and the consolidated report.

pub mod metrics;
pub mod report;
pub mod stats;

pub use metrics::{cosine, cosine_pairs, incoherence, incoherence_all, window_bin, BinPoint, CosineStats, DEFAULT_BINS};
pub use report::{build_report, MetricsReport, ProbabilitySet, ReportExtras, Source, Split};
