use alloc::vec::Vec;

use crate::embeddings::logit;
use crate::error::{ensure_len, Error, Result};
use crate::linalg::{cholesky, cholesky_solve, dot, matmul, Matrix, Op};
use crate::vae::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TargetScale {
    /// Fit `logit(p)`; predictions go through the sigmoid.
    Logit,
    /// Fit `p` itself; predictions are returned raw.
    Direct,
}

impl TargetScale {
    pub fn name(self) -> &'static str {
        match self {
            TargetScale::Logit => "logit",
            TargetScale::Direct => "direct",
        }
    }
}

/// Linear map `e ↦ βᵀe`, no intercept.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeModel {
    pub coefficients: Vec<f64>,
    pub target_scale: TargetScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFit {
    pub model: ProbeModel,
    /// Ridge strength added because the system was rank deficient; `None` for an exact solve.
    pub ridge: Option<f64>,
}

/// `k` distinct indices of `0..n`, sorted, drawn from `seed`; all of them when `k >= n`.
pub fn subsample(n: usize, k: usize, seed: u64) -> Vec<usize> {
    use rand::SeedableRng;
    if k >= n {
        return (0..n).collect();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Pivots below this fraction of the largest diagonal entry count as rank deficiency.
const RANK_TOL: f64 = 1e-12;

/// Cholesky solve of `a x = b`, adding a ridge when `a` is numerically singular.
fn spd_solve(mut a: Matrix, b: &[f64]) -> Result<(Vec<f64>, Option<f64>)> {
    let n = a.rows();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    if max_diag <= 0.0 || !max_diag.is_finite() {
        return Err(Error::Degenerate("probe design is zero or non-finite"));
    }
    let well_posed = |l: &Matrix| (0..n).all(|i| l[(i, i)] * l[(i, i)] > RANK_TOL * max_diag);
    if let Ok(l) = cholesky(&a) {
        if well_posed(&l) {
            return Ok((cholesky_solve(&l, b)?, None));
        }
    }
    let ridge = 1e-8 * max_diag;
    for i in 0..n {
        a[(i, i)] += ridge;
    }
    let l = cholesky(&a)?;
    Ok((cholesky_solve(&l, b)?, Some(ridge)))
}

/// Minimum-norm least squares for `x β = target(p)`.
///
/// With `n <= d` this solves the `n x n` gram system and interpolates the
/// training targets; otherwise the `d x d` normal equations.
pub fn probe_fit(x: &Matrix, p_true: &[f64], scale: TargetScale) -> Result<ProbeFit> {
    let (n, d) = (x.rows(), x.cols());
    ensure_len("probe targets", n, p_true.len())?;
    if n == 0 {
        return Err(Error::Empty("probe training set"));
    }
    if !x.all_finite() {
        return Err(Error::NonFinite("probe inputs"));
    }
    let y = p_true
        .iter()
        .map(|&p| match scale {
            TargetScale::Logit if p <= 0.0 || p >= 1.0 => Err(Error::ProbabilityOutOfRange(p)),
            TargetScale::Logit => Ok(logit(p)),
            TargetScale::Direct if p.is_finite() => Ok(p),
            TargetScale::Direct => Err(Error::NonFinite("probe target")),
        })
        .collect::<Result<Vec<f64>>>()?;

    let (coefficients, ridge) = if n <= d {
        let gram = matmul(x, Op::N, x, Op::T);
        let (alpha, ridge) = spd_solve(gram, &y)?;
        // β = Xᵀ α
        let mut beta = alloc::vec![0.0; d];
        for (i, a) in alpha.iter().enumerate() {
            for (b, v) in beta.iter_mut().zip(x.row(i)) {
                *b += a * v;
            }
        }
        (beta, ridge)
    } else {
        let normal = matmul(x, Op::T, x, Op::N);
        let mut rhs = alloc::vec![0.0; d];
        for (i, t) in y.iter().enumerate() {
            for (r, v) in rhs.iter_mut().zip(x.row(i)) {
                *r += t * v;
            }
        }
        spd_solve(normal, &rhs)?
    };
    Ok(ProbeFit {
        model: ProbeModel {
            coefficients,
            target_scale: scale,
        },
        ridge,
    })
}

impl ProbeModel {
    /// `βᵀe` before any link function.
    pub fn raw(&self, e: &[f64]) -> Result<f64> {
        ensure_len("probe input", self.coefficients.len(), e.len())?;
        Ok(dot(&self.coefficients, e))
    }

    /// Sigmoid of the raw score for LOGIT, the raw score for DIRECT.
    pub fn predict(&self, e: &[f64]) -> Result<f64> {
        let s = self.raw(e)?;
        Ok(match self.target_scale {
            TargetScale::Logit => sigmoid(s),
            TargetScale::Direct => s,
        })
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        (0..x.rows()).map(|i| self.predict(x.row(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_vec(n, d, (0..n * d).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    #[test]
    fn interpolates_when_underdetermined() {
        let x = random(3, 10, 1);
        let p = [0.2, 0.7, 0.55];
        for scale in [TargetScale::Logit, TargetScale::Direct] {
            let fit = probe_fit(&x, &p, scale).unwrap();
            assert_eq!(fit.ridge, None);
            for i in 0..3 {
                let target = if scale == TargetScale::Logit { logit(p[i]) } else { p[i] };
                assert!((fit.model.raw(x.row(i)).unwrap() - target).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn solution_has_minimum_norm() {
        // Any interpolant is β + v with v ⟂ rows; the min-norm one lies in the row space.
        let x = random(4, 9, 2);
        let fit = probe_fit(&x, &[0.1, 0.2, 0.3, 0.4], TargetScale::Direct).unwrap();
        let gram = matmul(&x, Op::N, &x, Op::T);
        let xb: Vec<f64> = (0..4).map(|i| dot(x.row(i), &fit.model.coefficients)).collect();
        let alpha = cholesky_solve(&cholesky(&gram).unwrap(), &xb).unwrap();
        let mut projected = alloc::vec![0.0; 9];
        for (i, a) in alpha.iter().enumerate() {
            for (b, v) in projected.iter_mut().zip(x.row(i)) {
                *b += a * v;
            }
        }
        for (a, b) in projected.iter().zip(&fit.model.coefficients) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_direct_targets_are_reproduced() {
        let x = random(5, 12, 3);
        let fit = probe_fit(&x, &[0.3; 5], TargetScale::Direct).unwrap();
        for p in fit.model.predict_batch(&x).unwrap() {
            assert!((p - 0.3).abs() < 1e-10);
        }
    }

    #[test]
    fn overdetermined_matches_least_squares() {
        let x = random(40, 3, 4);
        let beta = [0.5, -1.0, 2.0];
        let p: Vec<f64> = (0..40).map(|i| dot(x.row(i), &beta)).collect();
        let fit = probe_fit(&x, &p, TargetScale::Direct).unwrap();
        for (a, b) in fit.model.coefficients.iter().zip(beta) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn duplicate_rows_fall_back_to_ridge() {
        let mut x = random(3, 6, 5);
        let first = x.row(0).to_vec();
        x.row_mut(1).copy_from_slice(&first);
        let fit = probe_fit(&x, &[0.4, 0.4, 0.9], TargetScale::Logit).unwrap();
        assert!(fit.ridge.is_some());
        let p = fit.model.predict_batch(&x).unwrap();
        assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        assert!((p[2] - 0.9).abs() < 1e-4);
    }

    #[test]
    fn logit_rejects_certain_events() {
        let x = random(2, 4, 6);
        assert!(probe_fit(&x, &[0.0, 0.5], TargetScale::Logit).is_err());
        assert!(probe_fit(&x, &[0.0, 1.5], TargetScale::Direct).is_ok());
    }
}
