use coherent_core::baselines::train_ablated;
use coherent_core::corpus::{generate_corpus, Profile};
use coherent_core::embeddings::{generate_synthetic, EmbeddingDataset, SyntheticConfig};
use coherent_core::vae::{train, Phase, TrainConfig};
use coherent_core::Error;

fn small_dataset() -> EmbeddingDataset {
    let corpus = generate_corpus(&Profile::Train, 0).unwrap();
    let cfg = SyntheticConfig {
        dim: 24,
        ..SyntheticConfig::default()
    };
    generate_synthetic(&corpus[..200], &cfg).unwrap()
}

fn small_config() -> TrainConfig {
    TrainConfig {
        latent_dim: 3,
        hidden_width: Some(16),
        batch_size: 16,
        max_episodes: 60,
        learning_rate: 1e-3,
        seed: 11,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic_for_a_seed() {
    let data = small_dataset();
    let (a, log_a) = train(&data, &small_config()).unwrap();
    let (b, log_b) = train(&data, &small_config()).unwrap();
    assert_eq!(a, b);
    assert_eq!(log_a, log_b);
    let (c, _) = train(&data, &TrainConfig { seed: 12, ..small_config() }).unwrap();
    assert_ne!(a.encoder, c.encoder);
}

#[test]
fn record_order_does_not_matter() {
    let data = small_dataset();
    let mut records = data.records().to_vec();
    records.reverse();
    let shuffled = EmbeddingDataset::new(data.dim(), records).unwrap();
    let (a, _) = train(&data, &small_config()).unwrap();
    let (b, _) = train(&shuffled, &small_config()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_episodes_returns_the_initial_state() {
    let data = small_dataset();
    let cfg = TrainConfig {
        max_episodes: 0,
        ..small_config()
    };
    let (state, log) = train(&data, &cfg).unwrap();
    assert!(log.entries.is_empty());
    assert_eq!(state.encoder_opt.steps(), 0);
    let p = state.recover_batch(&data.matrix(false), &cfg).unwrap();
    assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
}

#[test]
fn schedule_alternates_in_blocks_of_the_period() {
    let data = small_dataset();
    let (state, log) = train(&data, &small_config()).unwrap();
    for e in &log.entries {
        let expected = if e.episode % 20 < 10 { Phase::Step1 } else { Phase::Step2 };
        assert_eq!(e.phase, expected, "episode {}", e.episode);
    }
    assert!(state.frozen_encoder.is_some());
}

#[test]
fn ablation_is_training_without_step2() {
    let data = small_dataset();
    let cfg = small_config();
    let ablated = train_ablated(&data, &cfg).unwrap();
    let (plain, log) = train(&data, &TrainConfig { step2_weight: 0.0, ..cfg }).unwrap();
    assert_eq!(ablated.state, plain);
    assert_eq!(ablated.log, log);
    assert!(log.entries.iter().all(|e| e.phase == Phase::Step1));
    assert!(plain.frozen_encoder.is_none());
}

#[test]
fn losses_fall_on_a_short_run() {
    let data = small_dataset();
    let cfg = TrainConfig {
        max_episodes: 400,
        ..small_config()
    };
    let (_, log) = train(&data, &cfg).unwrap();
    let head: f64 = log.entries[..10].iter().map(|e| e.loss).sum();
    let step1_tail = log.tail_mean(Phase::Step1, 10).unwrap() * 10.0;
    assert!(step1_tail < head, "{step1_tail} !< {head}");
}

#[test]
fn latent_must_be_small_relative_to_the_embedding() {
    let data = small_dataset();
    let cfg = TrainConfig {
        latent_dim: 6,
        ..small_config()
    };
    assert!(matches!(train(&data, &cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn exploding_learning_rate_is_reported_as_divergence() {
    let data = small_dataset();
    let cfg = TrainConfig {
        learning_rate: 1e12,
        max_episodes: 500,
        ..small_config()
    };
    match train(&data, &cfg) {
        Err(Error::Divergence { .. }) => {}
        other => panic!("expected divergence, got {:?}", other.map(|(_, log)| log.entries.last().copied())),
    }
}
