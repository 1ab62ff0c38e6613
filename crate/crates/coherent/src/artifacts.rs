//! Artifact layout under the output directory and the readers/writers for it.
//!
//! ```text
//! corpus/{train,test}.jsonl, corpus/manifest.json
//! embeddings/{train,test}.epr (+ .ids, .manifest.json)
//! models/{constrained,ablated}/   encoder.nnck, decoder.nnck, [frozen_encoder.nnck], model.json, log.jsonl
//! probes/{logit,direct}.json
//! probabilities/<source>.json
//! lasso/lasso.json, lasso/lasso_table.txt
//! report/report.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use coherent_core::corpus::{EventPair, FeatureVector};
use coherent_core::dice::DiceEvent;
use coherent_core::embeddings::EmbeddingDataset;
use coherent_core::eval::{ProbabilitySet, Source};
use coherent_core::nn::{AdamWConfig, DenseNet};
use coherent_core::rational::Ratio;
use coherent_core::vae::{LogEntry, TrainConfig, VaeState};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::error::{CliError, CliResult};
use crate::format::{epr, nnck, FormatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitName {
    Train,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 2] = [SplitName::Train, SplitName::Test];

    pub fn name(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Test => "test",
        }
    }

    pub fn eval(self) -> coherent_core::eval::Split {
        match self {
            SplitName::Train => coherent_core::eval::Split::Train,
            SplitName::Test => coherent_core::eval::Split::Test,
        }
    }
}

/// Paths of every artifact under one output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Layout { root: root.to_path_buf() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpus(&self, split: SplitName) -> PathBuf {
        self.root.join("corpus").join(format!("{}.jsonl", split.name()))
    }

    pub fn corpus_manifest(&self) -> PathBuf {
        self.root.join("corpus/manifest.json")
    }

    pub fn embeddings(&self, split: SplitName) -> PathBuf {
        self.root.join("embeddings").join(format!("{}.epr", split.name()))
    }

    pub fn model_dir(&self, name: &str) -> PathBuf {
        self.root.join("models").join(name)
    }

    pub fn probe(&self, scale: &str) -> PathBuf {
        self.root.join("probes").join(format!("{scale}.json"))
    }

    pub fn probabilities(&self, source: Source) -> PathBuf {
        self.root.join("probabilities").join(format!("{}.json", source.name()))
    }

    pub fn lasso_json(&self) -> PathBuf {
        self.root.join("lasso/lasso.json")
    }

    pub fn lasso_table(&self) -> PathBuf {
        self.root.join("lasso/lasso_table.txt")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report/report.json")
    }
}

/// Sidecar paths of an `EPR1` file.
pub fn ids_path(epr: &Path) -> PathBuf {
    epr.with_extension("ids")
}

pub fn manifest_path(epr: &Path) -> PathBuf {
    epr.with_extension("manifest.json")
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    fs::write(path, bytes).map_err(CliError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Input(format!("serializing {}: {e}", path.display())))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

/// Reads an upstream artifact; a missing file names the command that makes it.
pub fn read_upstream(path: &Path, command: &'static str) -> CliResult<Vec<u8>> {
    if !path.exists() {
        return Err(CliError::MissingArtifact {
            path: path.to_path_buf(),
            command,
        });
    }
    fs::read(path).map_err(CliError::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, command: &'static str) -> CliResult<T> {
    let bytes = read_upstream(path, command)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- corpus

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusLine {
    id: String,
    prompt: String,
    complement_prompt: String,
    event: DiceEvent,
    p_true: f64,
    p_true_rational: String,
    features: FeatureVector,
}

pub fn encode_corpus(pairs: &[EventPair]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in pairs {
        let line = CorpusLine {
            id: p.id.clone(),
            prompt: p.prompt.clone(),
            complement_prompt: p.complement_prompt.clone(),
            event: p.event,
            p_true: p.p_true_f64(),
            p_true_rational: p.p_true.to_string(),
            features: p.features,
        };
        serde_json::to_writer(&mut out, &line).expect("corpus lines serialize");
        out.push(b'\n');
    }
    out
}

/// Parses corpus lines and re-derives each pair, rejecting any line whose
/// stored probability or prompts disagree with the exact computation.
pub fn decode_corpus(path: &Path, bytes: &[u8]) -> CliResult<Vec<EventPair>> {
    let text = std::str::from_utf8(bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let at = || format!("{} line {}", path.display(), n + 1);
        let line: CorpusLine = serde_json::from_str(raw).map_err(|e| CliError::Input(format!("{}: {e}", at())))?;
        let e = line.event;
        let event = DiceEvent::new(e.spec(), e.kind(), e.comparison(), e.target())
            .map_err(|err| CliError::Input(format!("{}: {err}", at())))?;
        let pair = EventPair::new(line.id, event).map_err(|err| CliError::Input(format!("{}: {err}", at())))?;
        let stated: Ratio = line
            .p_true_rational
            .parse()
            .map_err(|err| CliError::Input(format!("{}: {err}", at())))?;
        if stated != pair.p_true || pair.prompt != line.prompt || pair.complement_prompt != line.complement_prompt {
            return Err(CliError::Input(format!("{}: stored values disagree with the event", at())));
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn read_corpus(layout: &Layout, split: SplitName) -> CliResult<Vec<EventPair>> {
    let path = layout.corpus(split);
    let bytes = read_upstream(&path, "generate")?;
    decode_corpus(&path, &bytes)
}

// ---------------------------------------------------------------- embeddings

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingManifest {
    pub format: String,
    pub version: u32,
    pub records: usize,
    pub dim: usize,
    pub payload_sha256: String,
    pub ids_sha256: String,
    /// Free-form provenance: synthetic config, or model id and layer.
    pub source: serde_json::Value,
    #[serde(default)]
    pub config_digest: Option<String>,
}

pub fn write_embeddings(
    path: &Path,
    dataset: &EmbeddingDataset,
    source: serde_json::Value,
    config_digest: Option<String>,
) -> CliResult<EmbeddingManifest> {
    let payload = epr::encode(dataset);
    let ids = epr::encode_index(dataset);
    let manifest = EmbeddingManifest {
        format: "EPR1".into(),
        version: epr::VERSION,
        records: dataset.len(),
        dim: dataset.dim(),
        payload_sha256: sha256_hex(&payload),
        ids_sha256: sha256_hex(ids.as_bytes()),
        source,
        config_digest,
    };
    write_bytes(path, &payload)?;
    write_bytes(&ids_path(path), ids.as_bytes())?;
    write_json(&manifest_path(path), &manifest)?;
    Ok(manifest)
}

/// Reads an `EPR1` file with its id index; when a manifest sits next to it,
/// its dimension and payload digest are checked too.
pub fn read_embeddings(
    path: &Path,
    expected_dim: Option<usize>,
    command: &'static str,
) -> CliResult<(EmbeddingDataset, Option<EmbeddingManifest>)> {
    let payload = read_upstream(path, command)?;
    let ids_file = ids_path(path);
    let ids = String::from_utf8(read_upstream(&ids_file, command)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", ids_file.display())))?;
    let mpath = manifest_path(path);
    let manifest: Option<EmbeddingManifest> = if mpath.exists() {
        Some(read_json(&mpath, command)?)
    } else {
        None
    };
    let mut expected = expected_dim;
    if let Some(m) = &manifest {
        let found = sha256_hex(&payload);
        if found != m.payload_sha256 {
            return Err(CliError::format(path)(FormatError::DigestMismatch {
                expected: m.payload_sha256.clone(),
                found,
            }));
        }
        if let Some(e) = expected {
            if e != m.dim {
                return Err(CliError::format(path)(FormatError::DimensionMismatch {
                    expected: e,
                    found: m.dim,
                }));
            }
        }
        expected = Some(m.dim);
    }
    let dataset = epr::decode(&payload, epr::decode_index(&ids), expected).map_err(CliError::format(path))?;
    Ok((dataset, manifest))
}

// ---------------------------------------------------------------- models

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// `constrained` or `ablated`.
    pub kind: String,
    pub config_digest: String,
    pub train: TrainConfig,
    /// Latent read as log odds, and the sign applied to it.
    pub latent_index: usize,
    pub sign: f64,
    pub pair_correlation: Vec<f64>,
    /// Set when no latent of an ablated model correlates negatively.
    pub warning: bool,
    pub episodes: usize,
    pub final_loss: Option<f64>,
}

pub struct SavedModel {
    pub state: VaeState,
    pub meta: ModelMeta,
}

pub fn write_model(dir: &Path, state: &VaeState, meta: &ModelMeta, log: &[LogEntry]) -> CliResult<()> {
    write_bytes(&dir.join("encoder.nnck"), &nnck::encode(&state.encoder))?;
    write_bytes(&dir.join("decoder.nnck"), &nnck::encode(&state.decoder))?;
    let frozen = dir.join("frozen_encoder.nnck");
    match &state.frozen_encoder {
        Some(net) => write_bytes(&frozen, &nnck::encode(net))?,
        None if frozen.exists() => fs::remove_file(&frozen).map_err(CliError::io(&frozen))?,
        None => {}
    }
    write_json(&dir.join("model.json"), meta)?;
    let mut lines = Vec::new();
    for entry in log {
        serde_json::to_writer(&mut lines, entry).expect("log entries serialize");
        lines.push(b'\n');
    }
    write_bytes(&dir.join("log.jsonl"), &lines)
}

fn read_net(path: &Path, command: &'static str) -> CliResult<DenseNet> {
    let bytes = read_upstream(path, command)?;
    nnck::decode(&bytes).map_err(CliError::format(path))
}

pub fn read_model(dir: &Path, command: &'static str) -> CliResult<SavedModel> {
    let meta: ModelMeta = read_json(&dir.join("model.json"), command)?;
    let encoder = read_net(&dir.join("encoder.nnck"), command)?;
    let decoder = read_net(&dir.join("decoder.nnck"), command)?;
    let mut state = VaeState::from_nets(encoder, decoder, AdamWConfig::default())?;
    let frozen = dir.join("frozen_encoder.nnck");
    if frozen.exists() {
        state.frozen_encoder = Some(read_net(&frozen, command)?);
    }
    Ok(SavedModel { state, meta })
}

// ---------------------------------------------------------------- probabilities

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityFile {
    pub source: Source,
    pub config_digest: String,
    pub sets: Vec<ProbabilitySet>,
}

pub fn write_probabilities(layout: &Layout, file: &ProbabilityFile) -> CliResult<PathBuf> {
    let path = layout.probabilities(file.source);
    write_json(&path, file)?;
    Ok(path)
}
