//! Comparison methods: the Step-1-only ablation, linear probes, judged
//! normalization and lasso regressions of prompt features on latent means.

mod ablation;
mod judged;
mod lasso;
mod probe;

pub use ablation::{orientation_sign, train_ablated, AblatedModel};
pub use judged::{normalize_judged, Normalized};
pub use lasso::{lasso_fit, lasso_table, LassoFit, LassoTable, MAX_SWEEPS, TOLERANCE};
pub use probe::{probe_fit, subsample, ProbeFit, ProbeModel, TargetScale};
