use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{LossOutput, TrainConfig, VaeState};
use crate::embeddings::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    Step1,
    Step2,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Step1 => "step1",
            Phase::Step2 => "step2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// `interleave_period` Step-1 episodes, snapshot, `interleave_period` Step-2 episodes, repeat.
    Interleaved,
    /// Every episode is Step 1 (the ablated β-VAE).
    Step1Only,
}

impl Schedule {
    pub fn phase(self, episode: usize, period: usize) -> Phase {
        match self {
            Schedule::Step1Only => Phase::Step1,
            Schedule::Interleaved if episode % (2 * period) < period => Phase::Step1,
            Schedule::Interleaved => Phase::Step2,
        }
    }

    fn snapshot_at(self, episode: usize, period: usize) -> bool {
        self == Schedule::Interleaved && episode % (2 * period) == period
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEntry {
    pub episode: usize,
    pub phase: Phase,
    pub loss: f64,
    pub recon: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub entries: Vec<LogEntry>,
}

impl TrainingLog {
    /// Mean loss of the last `n` entries of a phase.
    pub fn tail_mean(&self, phase: Phase, n: usize) -> Option<f64> {
        let tail: Vec<f64> = self
            .entries
            .iter()
            .rev()
            .filter(|e| e.phase == phase)
            .take(n)
            .map(|e| e.loss)
            .collect();
        (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

/// Trains with the interleaved schedule, or Step 1 only when `step2_weight` is zero.
pub fn train(dataset: &EmbeddingDataset, cfg: &TrainConfig) -> Result<(VaeState, TrainingLog)> {
    let schedule = if cfg.step2_weight == 0.0 {
        Schedule::Step1Only
    } else {
        Schedule::Interleaved
    };
    train_with_schedule(dataset, cfg, schedule)
}

/// Embedding pool: rows `0..n` are `e`, rows `n..2n` the matching `¬e`,
/// with records sorted by id so file order does not matter.
struct Pool {
    rows: Matrix,
    pairs: usize,
}

impl Pool {
    fn new(dataset: &EmbeddingDataset) -> Self {
        let mut records: Vec<_> = dataset.records().iter().collect();
        records.sort_by(|a, b| a.event_id.cmp(&b.event_id));
        let d = dataset.dim();
        let n = records.len();
        let mut rows = Matrix::zeros(2 * n, d);
        for (i, r) in records.iter().enumerate() {
            for (dst, src) in rows.row_mut(i).iter_mut().zip(&r.e) {
                *dst = f64::from(*src);
            }
            for (dst, src) in rows.row_mut(n + i).iter_mut().zip(&r.e_neg) {
                *dst = f64::from(*src);
            }
        }
        Pool { rows, pairs: n }
    }

    fn partner(&self, i: usize) -> usize {
        (i + self.pairs) % (2 * self.pairs)
    }

    fn gather(&self, idx: impl Iterator<Item = usize>, out: &mut Matrix) {
        for (slot, i) in idx.enumerate() {
            out.row_mut(slot).copy_from_slice(self.rows.row(i));
        }
    }
}

pub fn train_with_schedule(
    dataset: &EmbeddingDataset,
    cfg: &TrainConfig,
    schedule: Schedule,
) -> Result<(VaeState, TrainingLog)> {
    cfg.validate()?;
    let d = dataset.dim();
    let k = cfg.latent_dim;
    if 4 * k >= d {
        return Err(Error::InvalidConfig(format!(
            "latent_dim {k} must be below a quarter of the embedding dimension {d}"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    let pool = Pool::new(dataset);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hidden = cfg.hidden_width.unwrap_or(d);
    let mut state = VaeState::init(d, k, hidden, cfg.adamw(), &mut rng)?;
    let mut log = TrainingLog::default();

    let b = cfg.batch_size;
    let mut idx = alloc::vec![0usize; b];
    let mut input = Matrix::zeros(b, d);
    let mut target = Matrix::zeros(b, d);
    let mut eps = Matrix::zeros(b, k);
    for episode in 0..cfg.max_episodes {
        let phase = schedule.phase(episode, cfg.interleave_period);
        if schedule.snapshot_at(episode, cfg.interleave_period) {
            state.snapshot_encoder();
        }
        for i in idx.iter_mut() {
            *i = rng.random_range(0..2 * pool.pairs);
        }
        for v in eps.as_mut_slice() {
            *v = rng.sample(StandardNormal);
        }
        pool.gather(idx.iter().copied(), &mut input);
        let diverged = |_| Error::Divergence {
            episode,
            phase: phase.name(),
        };
        let mut out: LossOutput = match phase {
            Phase::Step1 => state.loss_step1(&input, &eps, cfg),
            Phase::Step2 => {
                pool.gather(idx.iter().map(|&i| pool.partner(i)), &mut target);
                state.loss_step2(&input, &target, &eps, cfg)
            }
        }
        .map_err(diverged)?;
        if phase == Phase::Step2 && cfg.step2_weight != 1.0 {
            let w = cfg.step2_weight;
            out.loss *= w;
            out.encoder_grads.iter_mut().for_each(|g| *g *= w);
            out.decoder_grads.iter_mut().for_each(|g| *g *= w);
        }
        state.apply_gradients(&out).map_err(diverged)?;
        log.entries.push(LogEntry {
            episode,
            phase,
            loss: out.loss,
            recon: out.recon,
            kl: out.kl,
        });
    }
    Ok((state, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaved_schedule_alternates_blocks() {
        let phases: Vec<Phase> = (0..8).map(|e| Schedule::Interleaved.phase(e, 2)).collect();
        use Phase::*;
        assert_eq!(phases, [Step1, Step1, Step2, Step2, Step1, Step1, Step2, Step2]);
        assert!(Schedule::Interleaved.snapshot_at(2, 2));
        assert!(Schedule::Interleaved.snapshot_at(6, 2));
        assert!(!Schedule::Interleaved.snapshot_at(4, 2));
        assert!((0..8).all(|e| Schedule::Step1Only.phase(e, 2) == Step1));
        assert!(!Schedule::Step1Only.snapshot_at(2, 2));
    }
}
