//! Dice events, their complements and exact outcome probabilities.
//!
//! Sum distributions are computed by convolving one die at a time over
//! integer outcome counts, so every probability is an exact [`Ratio`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::Ratio;

/// `rolls` dice with `sides` faces each, written `[rolls]d[sides]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiceSpec {
    rolls: u32,
    sides: u32,
}

impl DiceSpec {
    pub fn new(rolls: u32, sides: u32) -> Result<Self> {
        if rolls < 1 || sides < 2 {
            return Err(Error::InvalidConfig(format!(
                "dice spec needs rolls >= 1 and sides >= 2, got {rolls}d{sides}"
            )));
        }
        Ok(DiceSpec { rolls, sides })
    }

    pub fn rolls(&self) -> u32 {
        self.rolls
    }

    pub fn sides(&self) -> u32 {
        self.sides
    }

    pub fn min_sum(&self) -> i64 {
        i64::from(self.rolls)
    }

    pub fn max_sum(&self) -> i64 {
        i64::from(self.rolls) * i64::from(self.sides)
    }
}

impl fmt::Display for DiceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}d{}", self.rolls, self.sides)
    }
}

impl FromStr for DiceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("expected dice notation like 2d6, got {s:?}"));
        let (r, y) = s.trim().split_once(['d', 'D']).ok_or_else(bad)?;
        let rolls = r.parse().map_err(|_| bad())?;
        let sides = y.parse().map_err(|_| bad())?;
        DiceSpec::new(rolls, sides)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Comparison {
    Less,
    LessEq,
    Equal,
    NotEqual,
    GreaterEq,
    Greater,
}

impl Comparison {
    pub const ALL: [Comparison; 6] = [
        Comparison::Less,
        Comparison::LessEq,
        Comparison::Equal,
        Comparison::NotEqual,
        Comparison::GreaterEq,
        Comparison::Greater,
    ];

    /// Logical negation; an involution.
    pub fn complement(self) -> Self {
        match self {
            Comparison::Equal => Comparison::NotEqual,
            Comparison::NotEqual => Comparison::Equal,
            Comparison::Less => Comparison::GreaterEq,
            Comparison::GreaterEq => Comparison::Less,
            Comparison::LessEq => Comparison::Greater,
            Comparison::Greater => Comparison::LessEq,
        }
    }

    pub fn holds(self, value: i64, target: i64) -> bool {
        match self {
            Comparison::Less => value < target,
            Comparison::LessEq => value <= target,
            Comparison::Equal => value == target,
            Comparison::NotEqual => value != target,
            Comparison::GreaterEq => value >= target,
            Comparison::Greater => value > target,
        }
    }

    pub fn phrase(self) -> &'static str {
        match self {
            Comparison::Less => "less than",
            Comparison::LessEq => "less than or equal to",
            Comparison::Equal => "equal to",
            Comparison::NotEqual => "other than",
            Comparison::GreaterEq => "greater than or equal to",
            Comparison::Greater => "greater than",
        }
    }

    /// Short code used in event ids.
    pub fn code(self) -> &'static str {
        match self {
            Comparison::Less => "lt",
            Comparison::LessEq => "le",
            Comparison::Equal => "eq",
            Comparison::NotEqual => "ne",
            Comparison::GreaterEq => "ge",
            Comparison::Greater => "gt",
        }
    }

    /// -1 for `<`/`<=`, +1 for `>`/`>=`, 0 for `=`/`!=`.
    pub fn class(self) -> i8 {
        match self {
            Comparison::Less | Comparison::LessEq => -1,
            Comparison::Equal | Comparison::NotEqual => 0,
            Comparison::GreaterEq | Comparison::Greater => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum QueryKind {
    /// The face shown by a single die.
    SingleOutcome,
    /// The total of all rolls.
    Sum,
}

/// A probability query over dice rolls. Equality is canonical event identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiceEvent {
    spec: DiceSpec,
    kind: QueryKind,
    comparison: Comparison,
    target: i64,
}

impl DiceEvent {
    pub fn new(spec: DiceSpec, kind: QueryKind, comparison: Comparison, target: i64) -> Result<Self> {
        if kind == QueryKind::SingleOutcome && spec.rolls != 1 {
            return Err(Error::InvalidConfig(format!(
                "single-outcome events need exactly one die, got {spec}"
            )));
        }
        Ok(DiceEvent {
            spec,
            kind,
            comparison,
            target,
        })
    }

    /// Single-outcome query for one die, sum query otherwise.
    pub fn natural(spec: DiceSpec, comparison: Comparison, target: i64) -> Self {
        let kind = if spec.rolls == 1 {
            QueryKind::SingleOutcome
        } else {
            QueryKind::Sum
        };
        DiceEvent {
            spec,
            kind,
            comparison,
            target,
        }
    }

    pub fn spec(&self) -> DiceSpec {
        self.spec
    }

    pub fn kind(&self) -> QueryKind {
        self.kind
    }

    pub fn comparison(&self) -> Comparison {
        self.comparison
    }

    pub fn target(&self) -> i64 {
        self.target
    }

    /// Same spec, kind and target with the comparison negated.
    pub fn complement(&self) -> Self {
        DiceEvent {
            comparison: self.comparison.complement(),
            ..*self
        }
    }

    pub fn probability(&self) -> Result<Ratio> {
        exact_probability(self)
    }

    /// English question text for this event.
    pub fn render_prompt(&self) -> String {
        let t = self.target;
        let y = self.spec.sides;
        match (self.kind, self.comparison) {
            (QueryKind::SingleOutcome, Comparison::Equal) => {
                format!("What is the probability of rolling a {t} on a {y}-sided die?")
            }
            (QueryKind::SingleOutcome, c) => format!(
                "What is the probability of rolling a number {} {t} on a {y}-sided die?",
                c.phrase()
            ),
            (QueryKind::Sum, c) => format!(
                "What is the probability that the sum of {} rolls of a {y}-sided die is {} {t}?",
                self.spec.rolls,
                c.phrase()
            ),
        }
    }
}

/// Exact distribution of the sum of a [`DiceSpec`]'s rolls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumDistribution {
    spec: DiceSpec,
    /// `counts[i]` = number of ordered outcomes with sum `min_sum + i`.
    counts: Vec<u128>,
    total: u128,
}

impl SumDistribution {
    pub fn spec(&self) -> DiceSpec {
        self.spec
    }

    /// Number of equally likely ordered outcomes, `sides^rolls`.
    pub fn total_outcomes(&self) -> u128 {
        self.total
    }

    pub fn count(&self, sum: i64) -> u128 {
        let lo = self.spec.min_sum();
        if sum < lo || sum > self.spec.max_sum() {
            return 0;
        }
        self.counts[(sum - lo) as usize]
    }

    pub fn probability(&self, sum: i64) -> Ratio {
        Ratio::new(self.count(sum), self.total)
    }

    /// `(sum, probability)` over the full support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Ratio)> + '_ {
        let lo = self.spec.min_sum();
        let total = self.total;
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (lo + i as i64, Ratio::new(c, total)))
    }

    /// Exact probability that `comparison` holds between the sum and `target`.
    pub fn probability_where(&self, comparison: Comparison, target: i64) -> Ratio {
        let lo = self.spec.min_sum();
        // Each count is at most `total`, and the filtered sum is too.
        let hits: u128 = self
            .counts
            .iter()
            .enumerate()
            .filter(|&(i, _)| comparison.holds(lo + i as i64, target))
            .map(|(_, &c)| c)
            .sum();
        Ratio::new(hits, self.total)
    }
}

/// Distribution of the sum of `spec`, by iterated convolution one die at a time.
pub fn sum_distribution(spec: DiceSpec) -> Result<SumDistribution> {
    let overflow = || Error::Capacity("dice outcome count overflows u128");
    let sides = spec.sides as usize;
    let total = u128::from(spec.sides)
        .checked_pow(spec.rolls)
        .ok_or_else(overflow)?;
    // Distribution of one die: counts over sums 1..=sides.
    let mut counts = vec![1u128; sides];
    for _ in 1..spec.rolls {
        let mut next = vec![0u128; counts.len() + sides - 1];
        for (i, &c) in counts.iter().enumerate() {
            for slot in &mut next[i..i + sides] {
                *slot = slot.checked_add(c).ok_or_else(overflow)?;
            }
        }
        counts = next;
    }
    Ok(SumDistribution {
        spec,
        counts,
        total,
    })
}

pub fn exact_probability(event: &DiceEvent) -> Result<Ratio> {
    // A single-outcome event is the one-die sum distribution.
    let dist = sum_distribution(event.spec)?;
    Ok(dist.probability_where(event.comparison, event.target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn spec(s: &str) -> DiceSpec {
        s.parse().unwrap()
    }

    /// Counts outcomes satisfying the predicate by walking all `sides^rolls` rolls.
    fn enumerate(spec: DiceSpec, comparison: Comparison, target: i64) -> Ratio {
        let sides = spec.sides() as usize;
        let mut digits = vec![0usize; spec.rolls() as usize];
        let mut hits = 0u128;
        let mut total = 0u128;
        loop {
            let sum: i64 = digits.iter().map(|&d| d as i64 + 1).sum();
            total += 1;
            if comparison.holds(sum, target) {
                hits += 1;
            }
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ratio::new(hits, total);
                }
                digits[i] += 1;
                if digits[i] < sides {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn notation_round_trips() {
        for s in ["1d6", "2d17", "5d3", "6d6"] {
            assert_eq!(spec(s).to_string(), s);
        }
        assert!("0d6".parse::<DiceSpec>().is_err());
        assert!("2d1".parse::<DiceSpec>().is_err());
        assert!("2x6".parse::<DiceSpec>().is_err());
    }

    #[test]
    fn single_die_is_uniform() {
        let dist = sum_distribution(spec("1d6")).unwrap();
        for face in 1..=6 {
            assert_eq!(dist.probability(face), Ratio::new(1, 6));
        }
        assert_eq!(dist.probability(0), Ratio::ZERO);
        assert_eq!(dist.probability(7), Ratio::ZERO);
    }

    #[test]
    fn two_d6_seven_matches_enumeration() {
        let dist = sum_distribution(spec("2d6")).unwrap();
        assert_eq!(dist.probability(7), Ratio::new(6, 36));
        assert_eq!(dist.probability(7), enumerate(spec("2d6"), Comparison::Equal, 7));
    }

    #[test]
    fn distributions_are_normalised_over_exact_support() {
        for s in ["1d2", "3d6", "5d7", "2d17", "6d6", "8d10"] {
            let dist = sum_distribution(spec(s)).unwrap();
            let sp = dist.spec();
            let total = dist
                .iter()
                .try_fold(Ratio::ZERO, |acc, (_, p)| acc.checked_add(p))
                .unwrap();
            assert!(total.is_one(), "{s}");
            assert!(dist.iter().all(|(_, p)| !p.is_zero()));
            assert_eq!(dist.iter().next().unwrap().0, sp.min_sum());
            assert_eq!(dist.iter().last().unwrap().0, sp.max_sum());
        }
    }

    #[test]
    fn capacity_error_instead_of_rounding() {
        let err = sum_distribution(DiceSpec::new(40, 10).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn small_specs_match_exhaustive_enumeration() {
        for rolls in 1..=3 {
            for sides in 2..=10 {
                let sp = DiceSpec::new(rolls, sides).unwrap();
                for target in sp.min_sum() - 1..=sp.max_sum() + 1 {
                    for c in Comparison::ALL {
                        let e = DiceEvent::natural(sp, c, target);
                        assert_eq!(exact_probability(&e).unwrap(), enumerate(sp, c, target));
                    }
                }
            }
        }
    }

    #[test]
    fn complement_examples() {
        let e = DiceEvent::natural(spec("1d6"), Comparison::Equal, 5);
        assert_eq!(e.complement().comparison(), Comparison::NotEqual);
        assert_eq!(e.complement().target(), 5);
        let g = DiceEvent::natural(spec("8d10"), Comparison::Greater, 15);
        assert_eq!(g.complement().comparison(), Comparison::LessEq);
        assert_eq!(g.complement().complement(), g);
    }

    #[test]
    fn event_and_complement_sum_to_one() {
        let e = DiceEvent::natural(spec("1d6"), Comparison::Equal, 5);
        assert_eq!(exact_probability(&e).unwrap(), Ratio::new(1, 6));
        for c in Comparison::ALL {
            let ev = DiceEvent::natural(spec("4d7"), c, 13);
            let p = exact_probability(&ev).unwrap();
            let q = exact_probability(&ev.complement()).unwrap();
            assert!(p.checked_add(q).unwrap().is_one());
        }
    }

    #[test]
    fn single_outcome_requires_one_die() {
        assert!(DiceEvent::new(spec("2d6"), QueryKind::SingleOutcome, Comparison::Equal, 3).is_err());
        assert!(DiceEvent::new(spec("1d6"), QueryKind::SingleOutcome, Comparison::Equal, 3).is_ok());
    }

    #[test]
    fn prompts_use_fixed_templates() {
        let e = DiceEvent::natural(spec("1d6"), Comparison::Equal, 5);
        assert_eq!(
            e.render_prompt(),
            "What is the probability of rolling a 5 on a 6-sided die?"
        );
        assert_eq!(
            e.complement().render_prompt(),
            "What is the probability of rolling a number other than 5 on a 6-sided die?"
        );
        let g = DiceEvent::natural(spec("8d10"), Comparison::Greater, 15);
        assert_eq!(
            g.render_prompt(),
            "What is the probability that the sum of 8 rolls of a 10-sided die is greater than 15?"
        );
    }
}
