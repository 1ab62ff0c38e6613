//! Declarative experiment configuration (TOML) with per-command sections.
//!
//! Every key is optional; `docs/config.md` lists them with defaults.

use std::path::{Path, PathBuf};

use coherent_core::corpus::{Profile, TEST_SIZE, TRAIN_SIZE};
use coherent_core::dice::DiceSpec;
use coherent_core::embeddings::SyntheticConfig;
use coherent_core::vae::{TemperatureMode, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub corpus: CorpusSection,
    pub embeddings: EmbeddingsSection,
    pub train: TrainSection,
    pub ablate: AblateSection,
    pub probe: ProbeSection,
    pub lasso: LassoSection,
    pub judged: JudgedSection,
    pub report: ReportSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seed: 0,
            out: PathBuf::from("run"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub seed: Option<u64>,
    /// Dice specs like `"2d6"`; empty means the built-in train list.
    pub train_specs: Vec<String>,
    pub test_specs: Vec<String>,
    /// Pairs to keep; 0 keeps every candidate.
    pub train_size: usize,
    pub test_size: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            seed: None,
            train_specs: Vec::new(),
            test_specs: Vec::new(),
            train_size: TRAIN_SIZE,
            test_size: TEST_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    Synthetic,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingsSection {
    pub source: EmbeddingSource,
    pub dim: usize,
    pub n_factors: usize,
    pub noise_std: f64,
    pub factor_scale: f64,
    pub generator_seed: Option<u64>,
    /// `EPR1` files for `source = "external"`.
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
}

impl Default for EmbeddingsSection {
    fn default() -> Self {
        let s = SyntheticConfig::default();
        EmbeddingsSection {
            source: EmbeddingSource::Synthetic,
            dim: s.dim,
            n_factors: s.n_factors,
            noise_std: s.noise_std,
            factor_scale: s.factor_scale,
            generator_seed: None,
            train_path: None,
            test_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub seed: Option<u64>,
    pub beta: f64,
    pub temperature: f64,
    pub temperature_mode: TemperatureMode,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub latent_dim: usize,
    /// 0 means the embedding dimension.
    pub hidden_width: usize,
    pub interleave_period: usize,
    pub max_episodes: usize,
    pub recon_weight: f64,
    pub step2_weight: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            seed: None,
            beta: t.beta,
            temperature: t.temperature,
            temperature_mode: t.temperature_mode,
            learning_rate: t.learning_rate,
            weight_decay: t.weight_decay,
            batch_size: t.batch_size,
            latent_dim: t.latent_dim,
            hidden_width: 0,
            interleave_period: t.interleave_period,
            max_episodes: t.max_episodes,
            recon_weight: t.recon_weight,
            step2_weight: t.step2_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateSection {
    pub enabled: bool,
}

impl Default for AblateSection {
    fn default() -> Self {
        AblateSection { enabled: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub logit: bool,
    pub direct: bool,
    /// Fit on a seeded subsample of this many training pairs; 0 uses all of them.
    pub train_pairs: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            logit: true,
            direct: true,
            train_pairs: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LassoModel {
    Constrained,
    Ablated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoSection {
    /// L1 strength with both latent means and the feature standardized.
    pub penalty: f64,
    pub model: LassoModel,
}

impl Default for LassoSection {
    fn default() -> Self {
        LassoSection {
            penalty: 0.01,
            model: LassoModel::Constrained,
        }
    }
}

/// Elicitation records (line-delimited JSON) for the judged sources.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgedSection {
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub n_bins: usize,
    /// Accept upstream artifacts produced under a different config digest.
    pub force: bool,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            n_bins: coherent_core::eval::DEFAULT_BINS,
            force: false,
        }
    }
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub force: bool,
}

fn parse_specs(specs: &[String]) -> CliResult<Vec<DiceSpec>> {
    specs
        .iter()
        .map(|s| s.parse().map_err(|e| CliError::Input(format!("dice spec {s:?}: {e}"))))
        .collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    /// Reads `path` (or the defaults when `None`) and applies the overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(CliError::io(p))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        if let Some(seed) = overrides.seed {
            cfg.experiment.seed = seed;
        }
        if let Some(out) = &overrides.out {
            cfg.experiment.out = out.clone();
        }
        cfg.report.force |= overrides.force;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.train_profile()?;
        self.test_profile()?;
        self.train_config().validate()?;
        match self.embeddings.source {
            EmbeddingSource::Synthetic => self.synthetic_config().validate()?,
            EmbeddingSource::External => {
                for (name, p) in [
                    ("embeddings.train_path", &self.embeddings.train_path),
                    ("embeddings.test_path", &self.embeddings.test_path),
                ] {
                    match p {
                        None => return Err(CliError::Input(format!("{name} is required for external embeddings"))),
                        Some(p) if !p.exists() => {
                            return Err(CliError::Input(format!("{name} {} does not exist", p.display())))
                        }
                        _ => {}
                    }
                }
            }
        }
        for p in [&self.judged.train_path, &self.judged.test_path].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Input(format!("judged records {} do not exist", p.display())));
            }
        }
        if !(self.lasso.penalty >= 0.0) || !self.lasso.penalty.is_finite() {
            return Err(CliError::Input("lasso.penalty must be a finite number >= 0".into()));
        }
        if self.report.n_bins == 0 {
            return Err(CliError::Input("report.n_bins must be >= 1".into()));
        }
        Ok(())
    }

    pub fn corpus_seed(&self) -> u64 {
        self.corpus.seed.unwrap_or(self.experiment.seed)
    }

    fn profile(label: &str, specs: &[String], size: usize, default: Profile) -> CliResult<Profile> {
        let size = (size > 0).then_some(size);
        if specs.is_empty() && size == default.size() {
            return Ok(default);
        }
        let specs = if specs.is_empty() {
            default.specs()
        } else {
            parse_specs(specs)?
        };
        Ok(Profile::Custom {
            label: label.into(),
            specs,
            size,
        })
    }

    pub fn train_profile(&self) -> CliResult<Profile> {
        Self::profile("train", &self.corpus.train_specs, self.corpus.train_size, Profile::Train)
    }

    pub fn test_profile(&self) -> CliResult<Profile> {
        Self::profile("test", &self.corpus.test_specs, self.corpus.test_size, Profile::Test)
    }

    pub fn synthetic_config(&self) -> SyntheticConfig {
        let e = &self.embeddings;
        SyntheticConfig {
            dim: e.dim,
            n_factors: e.n_factors,
            noise_std: e.noise_std,
            factor_scale: e.factor_scale,
            generator_seed: e.generator_seed.unwrap_or(self.experiment.seed),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            beta: t.beta,
            temperature: t.temperature,
            temperature_mode: t.temperature_mode,
            learning_rate: t.learning_rate,
            weight_decay: t.weight_decay,
            batch_size: t.batch_size,
            latent_dim: t.latent_dim,
            hidden_width: (t.hidden_width > 0).then_some(t.hidden_width),
            interleave_period: t.interleave_period,
            max_episodes: t.max_episodes,
            seed: t.seed.unwrap_or(self.experiment.seed),
            recon_weight: t.recon_weight,
            step2_weight: t.step2_weight,
        }
    }

    /// Hex SHA-256 of everything that shapes upstream artifacts: the resolved
    /// config without the output directory and the report-only sections
    /// (`judged`, `report`).
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.experiment.out = PathBuf::new();
        c.judged = JudgedSection::default();
        c.report = ReportSection::default();
        let json = serde_json::to_vec(&c).expect("config serializes");
        sha256_hex(&json)
    }

    pub fn out_dir(&self) -> &Path {
        &self.experiment.out
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Input(format!("config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[train]\nbetta = 2.0\n").is_err());
        assert!(ExperimentConfig::from_toml("[nonsense]\n").is_err());
    }

    #[test]
    fn seeds_fall_back_to_the_experiment_seed() {
        let cfg = ExperimentConfig::from_toml("[experiment]\nseed = 7\n[train]\nseed = 3\n").unwrap();
        assert_eq!(cfg.train_config().seed, 3);
        assert_eq!(cfg.synthetic_config().generator_seed, 7);
        assert_eq!(cfg.corpus_seed(), 7);
    }

    #[test]
    fn digest_ignores_output_and_report_settings() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.experiment.out = "elsewhere".into();
        b.report.n_bins = 5;
        b.judged.test_path = Some("judged.jsonl".into());
        assert_eq!(a.digest(), b.digest());
        b.train.beta = 4.0;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn default_profiles_are_the_built_ins() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.train_profile().unwrap(), Profile::Train);
        assert_eq!(cfg.test_profile().unwrap(), Profile::Test);
        let small = ExperimentConfig::from_toml("[corpus]\ntrain_size = 40\ntest_specs = [\"2d6\"]\n").unwrap();
        assert!(matches!(small.train_profile().unwrap(), Profile::Custom { size: Some(40), .. }));
        assert!(ExperimentConfig::from_toml("[corpus]\ntest_specs = [\"2x6\"]\n")
            .unwrap()
            .validate()
            .is_err());
    }
}
