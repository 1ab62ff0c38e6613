use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::Matrix;

/// Coordinate descent stops once no coefficient moves more than this.
pub const TOLERANCE: f64 = 1e-8;
pub const MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LassoFit {
    /// One per predictor column, on the standardized scale.
    pub coefficients: Vec<f64>,
    /// Mean of the target (the predictors are centered).
    pub intercept: f64,
    pub penalty: f64,
    pub r_squared: f64,
    pub sweeps: usize,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Minimizes `(1/2n) ‖y - ȳ - X̃w‖² + penalty ‖w‖₁` where `X̃` has zero-mean,
/// unit-variance (population) columns. Constant columns keep a zero coefficient.
pub fn lasso_fit(x: &Matrix, y: &[f64], penalty: f64) -> Result<LassoFit> {
    let (n, k) = (x.rows(), x.cols());
    ensure_len("lasso target", n, y.len())?;
    if n <= k {
        return Err(Error::InvalidConfig(alloc::format!(
            "lasso needs more rows ({n}) than predictors ({k})"
        )));
    }
    if !(penalty >= 0.0) || !penalty.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!("penalty {penalty} must be a finite nonnegative number")));
    }
    if !x.all_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lasso inputs"));
    }
    let nf = n as f64;

    // Standardized columns, stored column-major for the sweeps.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut active = Vec::with_capacity(k);
    for j in 0..k {
        let c = x.column(j);
        let m = c.iter().sum::<f64>() / nf;
        let sd = sqrt(c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / nf);
        active.push(sd > 0.0);
        cols.push(if sd > 0.0 {
            c.iter().map(|v| (v - m) / sd).collect()
        } else {
            alloc::vec![0.0; n]
        });
    }
    let intercept = y.iter().sum::<f64>() / nf;
    let mut resid: Vec<f64> = y.iter().map(|v| v - intercept).collect();
    let tss: f64 = resid.iter().map(|r| r * r).sum();

    let mut w = alloc::vec![0.0; k];
    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged(MAX_SWEEPS));
        }
        sweeps += 1;
        let mut max_change = 0.0f64;
        for j in (0..k).filter(|&j| active[j]) {
            let c = &cols[j];
            // Columns have unit mean square, so the update needs no rescaling.
            let rho = c.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / nf + w[j];
            let new = soft_threshold(rho, penalty);
            let delta = new - w[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(c) {
                    *r -= delta * a;
                }
                w[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change < TOLERANCE {
            break;
        }
    }
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };
    Ok(LassoFit {
        coefficients: w,
        intercept,
        penalty,
        r_squared,
        sweeps,
    })
}

/// One independent regression per named target: features as rows, predictors as columns.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LassoTable {
    pub penalty: f64,
    pub rows: Vec<(String, LassoFit)>,
}

pub fn lasso_table(x: &Matrix, targets: &[(String, Vec<f64>)], penalty: f64) -> Result<LassoTable> {
    let rows = targets
        .iter()
        .map(|(name, y)| Ok((name.clone(), lasso_fit(x, y, penalty)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LassoTable { penalty, rows })
}
