use alloc::vec::Vec;

use libm::exp;

use crate::error::{ensure_len, Result};

/// Diagonal Gaussian `N(mu, exp(logvar))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLatent {
    pub mu: Vec<f64>,
    pub logvar: Vec<f64>,
}

impl GaussianLatent {
    pub fn new(mu: Vec<f64>, logvar: Vec<f64>) -> Result<Self> {
        ensure_len("latent logvar", mu.len(), logvar.len())?;
        Ok(GaussianLatent { mu, logvar })
    }

    pub fn standard(k: usize) -> Self {
        GaussianLatent {
            mu: alloc::vec![0.0; k],
            logvar: alloc::vec![0.0; k],
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.logvar.iter().map(|lv| exp(0.5 * lv)).collect()
    }
}

/// `mu + exp(logvar / 2) * epsilon`; the caller supplies the noise.
pub fn reparam_sample(latent: &GaussianLatent, epsilon: &[f64]) -> Result<Vec<f64>> {
    ensure_len("reparameterisation noise", latent.dim(), epsilon.len())?;
    Ok(latent
        .mu
        .iter()
        .zip(&latent.logvar)
        .zip(epsilon)
        .map(|((m, lv), e)| m + exp(0.5 * lv) * e)
        .collect())
}

/// `KL(q || N(0, I))`.
pub fn kl_std_normal(q: &GaussianLatent) -> f64 {
    q.mu.iter()
        .zip(&q.logvar)
        .map(|(m, lv)| 0.5 * (m * m + exp(*lv) - 1.0 - lv))
        .sum()
}

/// `KL(q || p)` between diagonal Gaussians of the same dimension.
pub fn kl_gauss_gauss(q: &GaussianLatent, p: &GaussianLatent) -> Result<f64> {
    ensure_len("kl operands", q.dim(), p.dim())?;
    Ok((0..q.dim())
        .map(|j| {
            let d = q.mu[j] - p.mu[j];
            0.5 * (p.logvar[j] - q.logvar[j]) + (exp(q.logvar[j]) + d * d) / (2.0 * exp(p.logvar[j]))
                - 0.5
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use libm::log;

    fn lat(mu: &[f64], logvar: &[f64]) -> GaussianLatent {
        GaussianLatent::new(mu.to_vec(), logvar.to_vec()).unwrap()
    }

    #[test]
    fn reparam_examples() {
        let l = lat(&[0.3, -1.2], &[-100.0, -100.0]);
        let z = reparam_sample(&l, &[2.0, -3.0]).unwrap();
        assert!((z[0] - 0.3).abs() < 1e-20 && (z[1] + 1.2).abs() < 1e-20);
        let z = reparam_sample(&lat(&[0.5], &[1.3]), &[0.0]).unwrap();
        assert_eq!(z, vec![0.5]);
        let z = reparam_sample(&GaussianLatent::standard(3), &[0.1, -0.2, 0.3]).unwrap();
        assert_eq!(z, vec![0.1, -0.2, 0.3]);
        assert!(reparam_sample(&l, &[1.0]).is_err());
    }

    #[test]
    fn kl_std_normal_examples() {
        assert_eq!(kl_std_normal(&GaussianLatent::standard(4)), 0.0);
        assert!((kl_std_normal(&lat(&[1.0], &[0.0])) - 0.5).abs() < 1e-15);
        let v = kl_std_normal(&lat(&[0.0], &[log(4.0)]));
        assert!((v - 0.5 * (4.0 - 1.0 - log(4.0))).abs() < 1e-15);
        assert!((v - 0.806_853).abs() < 1e-6);
    }

    #[test]
    fn kl_gauss_gauss_examples() {
        let q = lat(&[0.4, -2.0], &[0.7, -1.1]);
        assert_eq!(kl_gauss_gauss(&q, &q).unwrap(), 0.0);
        let v = kl_gauss_gauss(&lat(&[1.0], &[0.0]), &lat(&[0.0], &[0.0])).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = kl_gauss_gauss(&lat(&[0.0], &[log(4.0)]), &lat(&[0.0], &[0.0])).unwrap();
        assert!((v - (log(0.5) + 2.0 - 0.5)).abs() < 1e-15);
        assert!((v - 0.806_853).abs() < 1e-6);
        assert!(kl_gauss_gauss(&q, &GaussianLatent::standard(3)).is_err());
    }
}
