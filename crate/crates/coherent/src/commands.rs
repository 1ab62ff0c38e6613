//! One function per subcommand. Each reads its upstream artifacts from the
//! output directory, writes its own, and returns a one-line summary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use coherent_core::baselines::{
    lasso_table, normalize_judged, orientation_sign, probe_fit, subsample, train_ablated, LassoTable, ProbeModel,
    TargetScale,
};
use coherent_core::corpus::{disjoint, generate_corpus, EventPair, FeatureVector};
use coherent_core::embeddings::{generate_synthetic, EmbeddingDataset};
use coherent_core::eval::report::LatentScatter;
use coherent_core::eval::{build_report, MetricsReport, ProbabilitySet, ReportExtras, Source};
use coherent_core::linalg::Matrix;
use coherent_core::vae::{latent_diagnostics, train, TrainConfig, TrainingLog, VaeState};
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    read_corpus, read_embeddings, read_json, read_model, read_upstream, write_bytes, write_embeddings, write_json,
    write_model, write_probabilities, Layout, ModelMeta, ProbabilityFile, SplitName,
};
use crate::config::{EmbeddingSource, ExperimentConfig, LassoModel};
use crate::digest::sha256_hex;
use crate::error::{CliError, CliResult};
use crate::judged::read_judged;

pub const CONSTRAINED: &str = "constrained";
pub const ABLATED: &str = "ablated";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub config_digest: String,
    pub seed: u64,
    pub splits: BTreeMap<String, CorpusSplitInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSplitInfo {
    pub pairs: usize,
    pub sha256: String,
}

pub fn cmd_generate(cfg: &ExperimentConfig) -> CliResult<String> {
    let layout = Layout::new(cfg.out_dir());
    let seed = cfg.corpus_seed();
    let train = generate_corpus(&cfg.train_profile()?, seed)?;
    let test = generate_corpus(&cfg.test_profile()?, seed)?;
    if !disjoint(&train, &test) {
        return Err(CliError::Input("train and test corpora share events".into()));
    }
    let mut splits = BTreeMap::new();
    for (split, pairs) in [(SplitName::Train, &train), (SplitName::Test, &test)] {
        let bytes = crate::artifacts::encode_corpus(pairs);
        write_bytes(&layout.corpus(split), &bytes)?;
        splits.insert(
            split.name().to_string(),
            CorpusSplitInfo {
                pairs: pairs.len(),
                sha256: sha256_hex(&bytes),
            },
        );
    }
    write_json(
        &layout.corpus_manifest(),
        &CorpusManifest {
            config_digest: cfg.digest(),
            seed,
            splits,
        },
    )?;
    Ok(format!("corpus: {} train / {} test pairs", train.len(), test.len()))
}

pub fn cmd_synth(cfg: &ExperimentConfig) -> CliResult<String> {
    if cfg.embeddings.source != EmbeddingSource::Synthetic {
        return Err(CliError::Input(
            "embeddings.source is \"external\"; there is nothing to synthesize".into(),
        ));
    }
    let layout = Layout::new(cfg.out_dir());
    let synth = cfg.synthetic_config();
    let source = serde_json::json!({ "kind": "synthetic", "config": synth });
    let mut sizes = Vec::new();
    for split in SplitName::ALL {
        let corpus = read_corpus(&layout, split)?;
        if let Some(bad) = corpus.iter().find(|p| p.p_true.is_zero() || p.p_true.is_one()) {
            return Err(CliError::Input(format!(
                "pair {} has p_true = {}; certain events carry no probability signal and are rejected",
                bad.id, bad.p_true
            )));
        }
        let dataset = generate_synthetic(&corpus, &synth)?;
        write_embeddings(&layout.embeddings(split), &dataset, source.clone(), Some(cfg.digest()))?;
        sizes.push(dataset.len());
    }
    Ok(format!(
        "embeddings: d = {}, {} train / {} test pairs",
        synth.dim, sizes[0], sizes[1]
    ))
}

/// Embeddings of one split, with ids checked against the corpus.
pub struct SplitData {
    pub corpus: Vec<EventPair>,
    pub embeddings: EmbeddingDataset,
    pub digest: Option<String>,
}

pub fn load_split(cfg: &ExperimentConfig, split: SplitName, dim: Option<usize>) -> CliResult<SplitData> {
    let layout = Layout::new(cfg.out_dir());
    let corpus = read_corpus(&layout, split)?;
    let path = match (cfg.embeddings.source, split) {
        (EmbeddingSource::Synthetic, _) => layout.embeddings(split),
        (EmbeddingSource::External, SplitName::Train) => cfg.embeddings.train_path.clone().expect("validated"),
        (EmbeddingSource::External, SplitName::Test) => cfg.embeddings.test_path.clone().expect("validated"),
    };
    let (embeddings, manifest) = read_embeddings(&path, dim, "synth")?;
    let wanted: std::collections::BTreeSet<&str> = corpus.iter().map(|p| p.id.as_str()).collect();
    let have: std::collections::BTreeSet<&str> = embeddings.records().iter().map(|r| r.event_id.as_str()).collect();
    if wanted != have {
        let missing = wanted.difference(&have).count();
        let extra = have.difference(&wanted).count();
        return Err(CliError::Input(format!(
            "{}: ids differ from the {} corpus ({missing} missing, {extra} unknown)",
            path.display(),
            split.name()
        )));
    }
    Ok(SplitData {
        corpus,
        embeddings,
        digest: manifest.and_then(|m| m.config_digest),
    })
}

fn load_both(cfg: &ExperimentConfig) -> CliResult<(SplitData, SplitData)> {
    let train = load_split(cfg, SplitName::Train, None)?;
    let test = load_split(cfg, SplitName::Test, Some(train.embeddings.dim()))?;
    Ok((train, test))
}

/// `(P(A), P(¬A))` for every pair of a split from a per-row scorer.
fn probability_set(
    source: Source,
    split: SplitName,
    data: &EmbeddingDataset,
    score: impl Fn(&Matrix) -> coherent_core::Result<Vec<f64>>,
) -> CliResult<ProbabilitySet> {
    let ids = data.records().iter().map(|r| r.event_id.clone()).collect();
    let p = score(&data.matrix(false))?;
    let p_neg = score(&data.matrix(true))?;
    Ok(ProbabilitySet::new(source, split.eval(), ids, p, p_neg)?)
}

fn model_meta(
    kind: &str,
    cfg: &ExperimentConfig,
    train_cfg: &TrainConfig,
    index: usize,
    sign: f64,
    pair_correlation: Vec<f64>,
    warning: bool,
    log: &TrainingLog,
) -> ModelMeta {
    ModelMeta {
        kind: kind.into(),
        config_digest: cfg.digest(),
        train: train_cfg.clone(),
        latent_index: index,
        sign,
        pair_correlation,
        warning,
        episodes: log.entries.len(),
        final_loss: log.entries.last().map(|e| e.loss),
    }
}

fn recovered_sets(
    source: Source,
    state: &VaeState,
    index: usize,
    sign: f64,
    train_cfg: &TrainConfig,
    train: &SplitData,
    test: &SplitData,
) -> CliResult<Vec<ProbabilitySet>> {
    [(SplitName::Train, train), (SplitName::Test, test)]
        .into_iter()
        .map(|(split, data)| {
            probability_set(source, split, &data.embeddings, |x| {
                state.recover_latent_batch(x, index, sign, train_cfg)
            })
        })
        .collect()
}

pub fn cmd_train(cfg: &ExperimentConfig) -> CliResult<String> {
    let layout = Layout::new(cfg.out_dir());
    let (train_data, test_data) = load_both(cfg)?;
    let train_cfg = cfg.train_config();
    let (state, log) = train(&train_data.embeddings, &train_cfg)?;
    let diag = latent_diagnostics(&state, &train_data.embeddings)?;
    let sign = orientation_sign(&state, &train_data.embeddings, &train_data.corpus, 0)?;
    let meta = model_meta(
        CONSTRAINED,
        cfg,
        &train_cfg,
        0,
        sign,
        diag.pair_correlation.clone(),
        false,
        &log,
    );
    write_model(&layout.model_dir(CONSTRAINED), &state, &meta, &log.entries)?;
    let sets = recovered_sets(Source::Recovered, &state, 0, sign, &train_cfg, &train_data, &test_data)?;
    write_probabilities(
        &layout,
        &ProbabilityFile {
            source: Source::Recovered,
            config_digest: cfg.digest(),
            sets,
        },
    )?;
    Ok(format!(
        "trained {} episodes; latent 1 pair correlation {:.4}",
        log.entries.len(),
        diag.pair_correlation[0]
    ))
}

pub fn cmd_ablate(cfg: &ExperimentConfig) -> CliResult<String> {
    if !cfg.ablate.enabled {
        return Ok("ablation disabled in config".into());
    }
    let layout = Layout::new(cfg.out_dir());
    let (train_data, test_data) = load_both(cfg)?;
    let train_cfg = cfg.train_config();
    let mut model = train_ablated(&train_data.embeddings, &train_cfg)?;
    model.sign = orientation_sign(&model.state, &train_data.embeddings, &train_data.corpus, model.index)?;
    let diag = latent_diagnostics(&model.state, &train_data.embeddings)?;
    let meta = model_meta(
        ABLATED,
        cfg,
        &train_cfg,
        model.index,
        model.sign,
        diag.pair_correlation,
        model.warning,
        &model.log,
    );
    write_model(&layout.model_dir(ABLATED), &model.state, &meta, &model.log.entries)?;
    let sets = recovered_sets(
        Source::RecoveredAblated,
        &model.state,
        model.index,
        model.sign,
        &train_cfg,
        &train_data,
        &test_data,
    )?;
    write_probabilities(
        &layout,
        &ProbabilityFile {
            source: Source::RecoveredAblated,
            config_digest: cfg.digest(),
            sets,
        },
    )?;
    let note = if model.warning { " (warning: no negative correlation)" } else { "" };
    Ok(format!(
        "ablated model: selected latent {} with pair correlation {:.4}{note}",
        model.index + 1,
        model.correlation
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeArtifact {
    pub config_digest: String,
    pub model: ProbeModel,
    pub ridge: Option<f64>,
    pub train_pairs: usize,
}

/// Fits on `e` rows with `p` and `¬e` rows with `1 - p` for the chosen pairs.
pub fn probe_design(data: &SplitData, pairs: &[usize]) -> (Matrix, Vec<f64>) {
    let truth: BTreeMap<&str, &EventPair> = data.corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    let d = data.embeddings.dim();
    let mut x = Matrix::zeros(2 * pairs.len(), d);
    let mut y = Vec::with_capacity(2 * pairs.len());
    for (row, &i) in pairs.iter().enumerate() {
        let r = &data.embeddings.records()[i];
        let pair = truth[r.event_id.as_str()];
        for (dst, src) in x.row_mut(2 * row).iter_mut().zip(&r.e) {
            *dst = f64::from(*src);
        }
        for (dst, src) in x.row_mut(2 * row + 1).iter_mut().zip(&r.e_neg) {
            *dst = f64::from(*src);
        }
        y.push(pair.p_true_f64());
        y.push(pair.p_complement().to_f64());
    }
    (x, y)
}

pub fn cmd_probe(cfg: &ExperimentConfig) -> CliResult<String> {
    let layout = Layout::new(cfg.out_dir());
    let (train_data, test_data) = load_both(cfg)?;
    let n = train_data.embeddings.len();
    let k = if cfg.probe.train_pairs == 0 { n } else { cfg.probe.train_pairs };
    let chosen = subsample(n, k, cfg.experiment.seed);
    let (x, y) = probe_design(&train_data, &chosen);
    let mut done = Vec::new();
    for (enabled, scale, source) in [
        (cfg.probe.logit, TargetScale::Logit, Source::ProbeLogit),
        (cfg.probe.direct, TargetScale::Direct, Source::ProbeDirect),
    ] {
        if !enabled {
            continue;
        }
        let fit = probe_fit(&x, &y, scale)?;
        write_json(
            &layout.probe(scale.name()),
            &ProbeArtifact {
                config_digest: cfg.digest(),
                model: fit.model.clone(),
                ridge: fit.ridge,
                train_pairs: chosen.len(),
            },
        )?;
        let sets = [(SplitName::Train, &train_data), (SplitName::Test, &test_data)]
            .into_iter()
            .map(|(split, data)| probability_set(source, split, &data.embeddings, |m| fit.model.predict_batch(m)))
            .collect::<CliResult<Vec<_>>>()?;
        write_probabilities(
            &layout,
            &ProbabilityFile {
                source,
                config_digest: cfg.digest(),
                sets,
            },
        )?;
        let ridge = fit.ridge.map_or(String::new(), |r| format!(" (rank deficient, ridge {r:.3e})"));
        done.push(format!("{}{ridge}", scale.name()));
    }
    Ok(format!("probes fitted on {} pairs: {}", chosen.len(), done.join(", ")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoArtifact {
    pub config_digest: String,
    pub model: String,
    pub table: LassoTable,
}

/// Feature rows, latent columns, R² last. Coefficients are in standard deviations
/// of the feature per standard deviation of the latent.
pub fn render_lasso_table(table: &LassoTable) -> String {
    let k = table.rows.first().map_or(0, |(_, f)| f.coefficients.len());
    let mut out = format!("# lasso penalty {}\n", table.penalty);
    out.push_str(&format!("{:<18}", "feature"));
    for j in 1..=k {
        out.push_str(&format!("{:>10}", format!("z{j}")));
    }
    out.push_str(&format!("{:>10}\n", "R2"));
    for (name, fit) in &table.rows {
        out.push_str(&format!("{name:<18}"));
        for w in &fit.coefficients {
            out.push_str(&format!("{w:>10.4}"));
        }
        out.push_str(&format!("{:>10.4}\n", fit.r_squared));
    }
    out
}

/// Zero mean and unit population variance, so one penalty means the same for
/// every feature whatever its units. Constant columns come back all zero.
fn standardize(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    for x in &mut v {
        *x = if sd > 0.0 { (*x - mean) / sd } else { 0.0 };
    }
    v
}

pub fn cmd_lasso(cfg: &ExperimentConfig) -> CliResult<String> {
    let layout = Layout::new(cfg.out_dir());
    let (name, command) = match cfg.lasso.model {
        LassoModel::Constrained => (CONSTRAINED, "train"),
        LassoModel::Ablated => (ABLATED, "ablate"),
    };
    let saved = read_model(&layout.model_dir(name), command)?;
    let train_data = load_split(cfg, SplitName::Train, Some(saved.state.dim()))?;
    let (means, _) = saved.state.encode_batch(&train_data.embeddings.matrix(false))?;
    let by_id: BTreeMap<&str, &EventPair> = train_data.corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    let features: Vec<[f64; 6]> = train_data
        .embeddings
        .records()
        .iter()
        .map(|r| by_id[r.event_id.as_str()].features.as_array())
        .collect();
    let targets: Vec<(String, Vec<f64>)> = FeatureVector::NAMES
        .iter()
        .enumerate()
        .map(|(j, n)| (n.to_string(), standardize(features.iter().map(|f| f[j]).collect())))
        .collect();
    let table = lasso_table(&means, &targets, cfg.lasso.penalty)?;
    write_bytes(&layout.lasso_table(), render_lasso_table(&table).as_bytes())?;
    write_json(
        &layout.lasso_json(),
        &LassoArtifact {
            config_digest: cfg.digest(),
            model: name.into(),
            table,
        },
    )?;
    Ok(format!("lasso table for the {name} model written"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub config_digest: String,
    pub sources: Vec<Source>,
    /// Judged pairs that were both zero and were set to (0.5, 0.5) when normalizing.
    pub judged_degenerate_pairs: usize,
    pub report: MetricsReport,
}

pub fn cmd_report(cfg: &ExperimentConfig) -> CliResult<String> {
    let layout = Layout::new(cfg.out_dir());
    let digest = cfg.digest();
    let mut foreign: Vec<PathBuf> = Vec::new();
    let mut check = |path: PathBuf, found: Option<&str>| {
        if found.is_some_and(|d| d != digest) {
            foreign.push(path);
        }
    };

    let manifest: CorpusManifest = read_json(&layout.corpus_manifest(), "generate")?;
    check(layout.corpus_manifest(), Some(&manifest.config_digest));
    let train = load_split(cfg, SplitName::Train, None).ok();
    let test = train
        .as_ref()
        .and_then(|t| load_split(cfg, SplitName::Test, Some(t.embeddings.dim())).ok());
    let train_corpus = read_corpus(&layout, SplitName::Train)?;
    let test_corpus = read_corpus(&layout, SplitName::Test)?;
    if let Some(t) = &train {
        check(layout.embeddings(SplitName::Train), t.digest.as_deref());
    }
    if let Some(t) = &test {
        check(layout.embeddings(SplitName::Test), t.digest.as_deref());
    }

    let mut sets = vec![
        ProbabilitySet::truth(SplitName::Train.eval(), &train_corpus),
        ProbabilitySet::truth(SplitName::Test.eval(), &test_corpus),
    ];
    for source in [
        Source::Recovered,
        Source::RecoveredAblated,
        Source::ProbeLogit,
        Source::ProbeDirect,
    ] {
        let path = layout.probabilities(source);
        if !path.exists() {
            continue;
        }
        let file: ProbabilityFile = read_json(&path, "train")?;
        if file.source != source || file.sets.iter().any(|s| s.source != source) {
            return Err(CliError::Input(format!("{} holds the wrong source", path.display())));
        }
        check(path, Some(&file.config_digest));
        sets.extend(file.sets);
    }

    let mut degenerate = 0;
    for (split, path) in [
        (SplitName::Train, &cfg.judged.train_path),
        (SplitName::Test, &cfg.judged.test_path),
    ] {
        let Some(path) = path else { continue };
        let judged = read_judged(path, split.eval())?;
        let mut p = Vec::with_capacity(judged.len());
        let mut p_neg = Vec::with_capacity(judged.len());
        for (&a, &b) in judged.p.iter().zip(&judged.p_neg) {
            let n = normalize_judged(a, b)?;
            degenerate += usize::from(n.degenerate);
            p.push(n.p);
            p_neg.push(n.p_neg);
        }
        let normalized = ProbabilitySet::new(Source::JudgedNormalized, split.eval(), judged.ids.clone(), p, p_neg)?;
        sets.push(judged);
        sets.push(normalized);
    }

    let mut latents = Vec::new();
    if let Some(t) = &train {
        for name in [CONSTRAINED, ABLATED] {
            let dir = layout.model_dir(name);
            if !dir.join("model.json").exists() {
                continue;
            }
            let saved = read_model(&dir, "train")?;
            check(dir.join("model.json"), Some(&saved.meta.config_digest));
            let diag = latent_diagnostics(&saved.state, &t.embeddings)?;
            latents.extend(LatentScatter::from_diagnostics(name, SplitName::Train.eval(), &diag));
        }
    }

    if !foreign.is_empty() && !cfg.report.force {
        let list: Vec<String> = foreign.iter().map(|p| p.display().to_string()).collect();
        return Err(CliError::Input(format!(
            "artifacts from a different config (digest {digest} expected): {}; rerun them or pass --force",
            list.join(", ")
        )));
    }

    let mut datasets = Vec::new();
    if let Some(t) = &train {
        datasets.push((SplitName::Train.eval(), &t.embeddings));
    }
    if let Some(t) = &test {
        datasets.push((SplitName::Test.eval(), &t.embeddings));
    }
    let extras = ReportExtras {
        datasets,
        latents,
        n_bins: Some(cfg.report.n_bins),
    };
    let report = build_report(&train_corpus, &test_corpus, &sets, &extras)?;
    let mut sources: Vec<Source> = sets.iter().map(|s| s.source).collect();
    sources.sort();
    sources.dedup();
    write_json(
        &layout.report(),
        &ReportArtifact {
            config_digest: digest,
            sources: sources.clone(),
            judged_degenerate_pairs: degenerate,
            report,
        },
    )?;
    let names: Vec<&str> = sources.iter().map(|s| s.name()).collect();
    Ok(format!("report over {} written to {}", names.join(", "), layout.report().display()))
}

/// Reads a finished report back.
pub fn read_report(cfg: &ExperimentConfig) -> CliResult<ReportArtifact> {
    let layout = Layout::new(cfg.out_dir());
    let _ = read_upstream(&layout.report(), "report")?;
    read_json(&layout.report(), "report")
}
