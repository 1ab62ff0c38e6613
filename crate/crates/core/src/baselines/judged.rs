use crate::error::{Error, Result};

/// A judged pair rescaled to sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub p: f64,
    pub p_neg: f64,
    /// Both judgments were zero; the pair was set to `(0.5, 0.5)`.
    pub degenerate: bool,
}

/// `(p, p_neg) / (p + p_neg)`.
pub fn normalize_judged(p: f64, p_neg: f64) -> Result<Normalized> {
    for v in [p, p_neg] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ProbabilityOutOfRange(v));
        }
    }
    let total = p + p_neg;
    if total == 0.0 {
        return Ok(Normalized {
            p: 0.5,
            p_neg: 0.5,
            degenerate: true,
        });
    }
    Ok(Normalized {
        p: p / total,
        p_neg: p_neg / total,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let n = normalize_judged(0.7, 0.5).unwrap();
        assert!((n.p - 7.0 / 12.0).abs() < 1e-15 && (n.p_neg - 5.0 / 12.0).abs() < 1e-15);
        let n = normalize_judged(0.4, 0.6).unwrap();
        assert_eq!((n.p, n.p_neg), (0.4, 0.6));
        let n = normalize_judged(0.0, 0.0).unwrap();
        assert_eq!((n.p, n.p_neg, n.degenerate), (0.5, 0.5, true));
        assert!(normalize_judged(1.5, 0.2).is_err());
        assert!(normalize_judged(f64::NAN, 0.2).is_err());
    }

    #[test]
    fn sums_to_one() {
        for i in 0..=50 {
            for j in 0..=50 {
                if i + j == 0 {
                    continue;
                }
                let n = normalize_judged(i as f64 / 50.0, j as f64 / 50.0).unwrap();
                assert!((n.p + n.p_neg - 1.0).abs() <= 1e-15);
            }
        }
    }
}
