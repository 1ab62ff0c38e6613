//! Exact non-negative rationals for dice probabilities.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// A reduced non-negative fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    /// Builds and reduces `num / den`. Panics if `den == 0`.
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        if g == 0 {
            return Self::ZERO;
        }
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn checked_add(self, other: Ratio) -> Result<Ratio> {
        let g = gcd(self.den, other.den);
        let lhs_scale = other.den / g;
        let rhs_scale = self.den / g;
        let overflow = || Error::Capacity("rational addition overflow");
        let num = self
            .num
            .checked_mul(lhs_scale)
            .and_then(|a| other.num.checked_mul(rhs_scale).and_then(|b| a.checked_add(b)))
            .ok_or_else(overflow)?;
        let den = self.den.checked_mul(lhs_scale).ok_or_else(overflow)?;
        Ok(Ratio::new(num, den))
    }

    /// `1 - self`, or `None` when `self > 1`.
    pub fn complement(self) -> Option<Ratio> {
        self.den.checked_sub(self.num).map(|n| Ratio::new(n, self.den))
    }

    pub fn to_f64(self) -> f64 {
        // Both parts fit comfortably below 2^100 for any dice spec we accept;
        // dividing the f64 projections loses at most one ulp each.
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(alloc::format!("not a rational: {s:?}"));
        let (n, d) = s.split_once('/').ok_or_else(bad)?;
        let num: u128 = n.trim().parse().map_err(|_| bad())?;
        let den: u128 = d.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Ratio::new(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_on_construction() {
        let r = Ratio::new(6, 36);
        assert_eq!((r.numer(), r.denom()), (1, 6));
        assert_eq!(Ratio::new(0, 17), Ratio::ZERO);
    }

    #[test]
    fn addition_and_complement_are_exact() {
        let a = Ratio::new(1, 6);
        let b = a.complement().unwrap();
        assert_eq!(b, Ratio::new(5, 6));
        assert!(a.checked_add(b).unwrap().is_one());
        assert_eq!(Ratio::new(7, 5).complement(), None);
    }

    #[test]
    fn parse_display_round_trip() {
        let r: Ratio = "21/216".parse().unwrap();
        assert_eq!(alloc::format!("{r}"), "7/72");
        assert!("3/0".parse::<Ratio>().is_err());
        assert!("x".parse::<Ratio>().is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = Ratio::new(1, u128::MAX);
        let other = Ratio::new(1, u128::MAX - 1);
        assert_eq!(
            big.checked_add(other),
            Err(Error::Capacity("rational addition overflow"))
        );
    }
}
