//! Paired event/complement corpora over dice specs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dice::{exact_probability, Comparison, DiceEvent, DiceSpec, QueryKind};
use crate::error::{Error, Result};
use crate::rational::Ratio;

/// Dice specs of the training corpus, as `(rolls, sides)`.
pub const TRAIN_SPECS: [(u32, u32); 30] = [
    (1, 6), (2, 6), (3, 6), (4, 6), (5, 6),
    (1, 5), (2, 5), (3, 5), (4, 5), (5, 5),
    (1, 7), (2, 7), (3, 7), (4, 7), (5, 7),
    (1, 3), (2, 3), (3, 3), (4, 3), (5, 3),
    (1, 4), (2, 4), (3, 4), (4, 4), (5, 4),
    (1, 10), (2, 10), (3, 10),
    (1, 17), (2, 17),
];

/// Held-out dice specs of the test corpus.
pub const TEST_SPECS: [(u32, u32); 4] = [(6, 6), (4, 10), (3, 12), (2, 16)];

pub const TRAIN_SIZE: usize = 1728;
pub const TEST_SIZE: usize = 480;

/// Comparisons enumerated as the primary event of a pair. `NotEqual` only
/// appears as the complement of an `Equal` question.
const PRIMARY_COMPARISONS: [Comparison; 5] = [
    Comparison::Less,
    Comparison::LessEq,
    Comparison::Equal,
    Comparison::GreaterEq,
    Comparison::Greater,
];

/// Which specs to enumerate and how many pairs to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Profile {
    Train,
    Test,
    Custom {
        label: String,
        specs: Vec<DiceSpec>,
        /// `None` keeps every candidate.
        size: Option<usize>,
    },
}

impl Profile {
    pub fn label(&self) -> &str {
        match self {
            Profile::Train => "train",
            Profile::Test => "test",
            Profile::Custom { label, .. } => label,
        }
    }

    pub fn specs(&self) -> Vec<DiceSpec> {
        let from = |list: &[(u32, u32)]| {
            list.iter()
                .map(|&(r, s)| DiceSpec::new(r, s).expect("built-in specs are valid"))
                .collect()
        };
        match self {
            Profile::Train => from(&TRAIN_SPECS),
            Profile::Test => from(&TEST_SPECS),
            Profile::Custom { specs, .. } => specs.clone(),
        }
    }

    pub fn size(&self) -> Option<usize> {
        match self {
            Profile::Train => Some(TRAIN_SIZE),
            Profile::Test => Some(TEST_SIZE),
            Profile::Custom { size, .. } => *size,
        }
    }
}

/// The six prompt features used in the latent regressions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    pub n_rolls: u32,
    pub n_sides: u32,
    pub outcome: i64,
    pub p_true: f64,
    pub is_sum: u8,
    pub comparison_class: i8,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 6] = [
        "n_rolls",
        "n_sides",
        "outcome",
        "p_true",
        "is_sum",
        "comparison_class",
    ];

    pub fn of(event: &DiceEvent, p_true: Ratio) -> Self {
        FeatureVector {
            n_rolls: event.spec().rolls(),
            n_sides: event.spec().sides(),
            outcome: event.target(),
            p_true: p_true.to_f64(),
            is_sum: u8::from(event.kind() == QueryKind::Sum),
            comparison_class: event.comparison().class(),
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            f64::from(self.n_rolls),
            f64::from(self.n_sides),
            self.outcome as f64,
            self.p_true,
            f64::from(self.is_sum),
            f64::from(self.comparison_class),
        ]
    }
}

/// An event, its complement, their prompts and the exact truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPair {
    pub id: String,
    pub event: DiceEvent,
    pub complement_event: DiceEvent,
    pub prompt: String,
    pub complement_prompt: String,
    pub p_true: Ratio,
    pub features: FeatureVector,
}

impl EventPair {
    pub fn new(id: String, event: DiceEvent) -> Result<Self> {
        let p_true = exact_probability(&event)?;
        let complement_event = event.complement();
        Ok(EventPair {
            id,
            prompt: event.render_prompt(),
            complement_prompt: complement_event.render_prompt(),
            features: FeatureVector::of(&event, p_true),
            event,
            complement_event,
            p_true,
        })
    }

    pub fn p_true_f64(&self) -> f64 {
        self.p_true.to_f64()
    }

    /// Exact probability of the complement.
    pub fn p_complement(&self) -> Ratio {
        self.p_true.complement().expect("probabilities never exceed one")
    }
}

/// Canonical id of a generated pair, e.g. `train-2d6-le-7`.
pub fn event_id(label: &str, event: &DiceEvent) -> String {
    format!(
        "{label}-{}-{}-{}",
        event.spec(),
        event.comparison().code(),
        event.target()
    )
}

/// All non-degenerate primary events of a spec, ordered by target then comparison.
pub fn candidate_events(spec: DiceSpec) -> Result<Vec<(DiceEvent, Ratio)>> {
    let mut out = Vec::new();
    for target in spec.min_sum()..=spec.max_sum() {
        for c in PRIMARY_COMPARISONS {
            let event = DiceEvent::natural(spec, c, target);
            let p = exact_probability(&event)?;
            if !p.is_zero() && !p.is_one() {
                out.push((event, p));
            }
        }
    }
    Ok(out)
}

/// Largest-remainder apportionment of `size` across `counts`, ties to the earlier entry.
fn apportion(counts: &[usize], size: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let mut quotas: Vec<usize> = counts.iter().map(|&c| c * size / total).collect();
    let mut remainders: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (c * size % total, i))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let assigned: usize = quotas.iter().sum();
    for &(_, i) in remainders.iter().take(size - assigned) {
        quotas[i] += 1;
    }
    quotas
}

/// Enumerates candidates per spec and, when the profile fixes a size, keeps a
/// seeded stratified subsample (quota per spec proportional to its candidates).
pub fn generate_corpus(profile: &Profile, seed: u64) -> Result<Vec<EventPair>> {
    let specs = profile.specs();
    if specs.is_empty() {
        return Err(Error::Empty("corpus profile has no dice specs"));
    }
    let mut per_spec = Vec::with_capacity(specs.len());
    let mut seen = BTreeSet::new();
    for spec in &specs {
        if !seen.insert(*spec) {
            return Err(Error::InvalidConfig(format!("dice spec {spec} listed twice")));
        }
        per_spec.push(candidate_events(*spec)?);
    }
    let counts: Vec<usize> = per_spec.iter().map(Vec::len).collect();
    let available: usize = counts.iter().sum();
    let quotas = match profile.size() {
        None => counts.clone(),
        Some(size) if size > available => {
            return Err(Error::InvalidConfig(format!(
                "requested {size} pairs but only {available} non-degenerate events exist"
            )))
        }
        Some(size) => apportion(&counts, size),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = profile.label();
    let mut pairs = Vec::with_capacity(quotas.iter().sum());
    for (candidates, &quota) in per_spec.iter().zip(&quotas) {
        let mut chosen = rand::seq::index::sample(&mut rng, candidates.len(), quota).into_vec();
        chosen.sort_unstable();
        for i in chosen {
            let (event, _) = candidates[i];
            pairs.push(EventPair::new(event_id(label, &event), event)?);
        }
    }
    Ok(pairs)
}

/// True when no event or complement of `a` occurs (either way round) in `b`.
pub fn disjoint(a: &[EventPair], b: &[EventPair]) -> bool {
    let events: BTreeSet<DiceEvent> = b
        .iter()
        .flat_map(|p| [p.event, p.complement_event])
        .collect();
    a.iter()
        .all(|p| !events.contains(&p.event) && !events.contains(&p.complement_event))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn profile_sizes() {
        let train = generate_corpus(&Profile::Train, 7).unwrap();
        let test = generate_corpus(&Profile::Test, 7).unwrap();
        assert_eq!(train.len(), TRAIN_SIZE);
        assert_eq!(test.len(), TEST_SIZE);
        assert!(disjoint(&test, &train));
    }

    #[test]
    fn every_spec_is_represented() {
        let train = generate_corpus(&Profile::Train, 3).unwrap();
        let specs: BTreeSet<_> = train.iter().map(|p| p.event.spec()).collect();
        assert_eq!(specs.len(), TRAIN_SPECS.len());
    }

    #[test]
    fn pairs_are_coherent_and_nondegenerate() {
        for pair in generate_corpus(&Profile::Train, 11).unwrap() {
            assert!(!pair.p_true.is_zero() && !pair.p_true.is_one());
            let q = exact_probability(&pair.complement_event).unwrap();
            assert!(pair.p_true.checked_add(q).unwrap().is_one(), "{}", pair.id);
            assert_eq!(pair.complement_event.complement(), pair.event);
        }
    }

    #[test]
    fn ids_and_prompts_are_unique() {
        let train = generate_corpus(&Profile::Train, 5).unwrap();
        let ids: BTreeSet<_> = train.iter().map(|p| p.id.clone()).collect();
        let prompts: BTreeSet<_> = train.iter().map(|p| p.prompt.clone()).collect();
        assert_eq!(ids.len(), train.len());
        assert_eq!(prompts.len(), train.len());
    }

    #[test]
    fn seed_controls_subsample() {
        let a = generate_corpus(&Profile::Test, 1).unwrap();
        let b = generate_corpus(&Profile::Test, 1).unwrap();
        let c = generate_corpus(&Profile::Test, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn custom_profile_without_size_keeps_everything() {
        let spec = DiceSpec::new(1, 6).unwrap();
        let profile = Profile::Custom {
            label: "toy".into(),
            specs: vec![spec],
            size: None,
        };
        let pairs = generate_corpus(&profile, 0).unwrap();
        // 6 equalities, lt 2..=6, le 1..=5, ge 2..=6, gt 1..=5
        assert_eq!(pairs.len(), 6 + 4 * 5);
        assert_eq!(pairs[0].id, "toy-1d6-le-1");
    }

    #[test]
    fn empty_and_oversized_profiles_are_rejected() {
        let empty = Profile::Custom {
            label: "x".into(),
            specs: vec![],
            size: None,
        };
        assert!(matches!(generate_corpus(&empty, 0), Err(Error::Empty(_))));
        let big = Profile::Custom {
            label: "x".into(),
            specs: vec![DiceSpec::new(1, 3).unwrap()],
            size: Some(100),
        };
        assert!(generate_corpus(&big, 0).is_err());
    }

    #[test]
    fn apportionment_is_exact() {
        assert_eq!(apportion(&[10, 10, 10], 10), vec![4, 3, 3]);
        assert_eq!(apportion(&[5, 1], 6), vec![5, 1]);
    }

    #[test]
    fn features_follow_the_example_prompt() {
        let e = DiceEvent::natural(DiceSpec::new(1, 6).unwrap(), Comparison::Equal, 5);
        let pair = EventPair::new("x".into(), e).unwrap();
        let f = pair.features;
        assert_eq!((f.n_rolls, f.n_sides, f.outcome, f.is_sum, f.comparison_class), (1, 6, 5, 0, 0));
        assert!((f.p_true - 1.0 / 6.0).abs() < 1e-15);
    }
}
