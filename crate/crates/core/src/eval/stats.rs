//! Descriptive and inferential statistics on `f64` samples.

use libm::{exp, fabs, lgamma, log, sqrt};

use crate::error::{ensure_len, Error, Result};

/// Two-sided critical value of the standard normal at 95%.
pub const Z_95: f64 = 1.96;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n - 1` in the denominator.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn sample_sd(x: &[f64]) -> f64 {
    sqrt(sample_variance(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Pearson's r with a two-sided p-value from `t = r sqrt((n-2)/(1-r^2))` on `n - 2` dof.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    ensure_len("pearson operands", x.len(), y.len())?;
    let n = x.len();
    if n < 3 {
        return Err(Error::Degenerate("pearson needs at least three points"));
    }
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
        return Err(Error::Degenerate("correlation is undefined for a constant input"));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation is undefined for a constant input"));
    }
    let r = (sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p_value = if fabs(r) >= 1.0 {
        0.0
    } else {
        let t = r * sqrt(dof / (1.0 - r * r));
        student_t_two_sided(t, dof)
    };
    Ok(Correlation { r, p_value, n })
}

pub fn mse(x: &[f64], y: &[f64]) -> Result<f64> {
    ensure_len("mse operands", x.len(), y.len())?;
    if x.is_empty() {
        return Err(Error::Empty("mse of no points"));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Normal-approximation interval `mean ± 1.96 sd / sqrt(n)`.
pub fn mean_ci95(x: &[f64]) -> Result<MeanCi> {
    if x.len() < 2 {
        return Err(Error::Degenerate("a confidence interval needs two values"));
    }
    let m = mean(x);
    let half = Z_95 * sample_sd(x) / sqrt(x.len() as f64);
    Ok(MeanCi {
        mean: m,
        lo: m - half,
        hi: m + half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TTest {
    pub t: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Paired t-test on `a - b`.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTest> {
    ensure_len("paired t operands", a.len(), b.len())?;
    let n = a.len();
    if n < 2 {
        return Err(Error::Degenerate("a paired t-test needs two pairs"));
    }
    let diffs: alloc::vec::Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd = sample_sd(&diffs);
    // A constant shift rarely survives subtraction bit-exactly; treat an SD at
    // rounding level relative to the differences themselves as zero.
    let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if sd <= 1e-13 * scale || !sd.is_finite() {
        return Err(Error::Degenerate("paired differences have zero variance"));
    }
    let t = mean(&diffs) / (sd / sqrt(n as f64));
    let dof = n - 1;
    Ok(TTest {
        t,
        dof,
        p_value: student_t_two_sided(t, dof as f64),
    })
}

/// `P(|T| >= |t|)` for Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    regularized_incomplete_beta(0.5 * dof, 0.5, x)
}

/// `P(T <= t)` for Student's t.
pub fn student_t_cdf(t: f64, dof: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, dof);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `I_x(a, b)` by the continued fraction, using the symmetry relation for
/// `x` above the mean of the beta distribution.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 100_000;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}
