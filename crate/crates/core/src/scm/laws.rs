//! Scalar distributions and the Gaussian copula used to couple latents.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// A one-dimensional latent-variable law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScalarLaw {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    /// Normal restricted to `[lo, hi]` by inverse-cdf rejection-free draws.
    TruncNormal { mean: f64, sd: f64, lo: f64, hi: f64 },
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarLaw::Constant(v) if v.is_finite() => Ok(()),
            ScalarLaw::Uniform { lo, hi } if lo < hi => Ok(()),
            ScalarLaw::Normal { sd, .. } if sd > 0.0 => Ok(()),
            ScalarLaw::TruncNormal { sd, lo, hi, .. } if sd > 0.0 && lo < hi => Ok(()),
            _ => Err(Error::InvalidModel(format!("invalid scalar law {self:?}"))),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ScalarLaw::Constant(v) => v,
            ScalarLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            ScalarLaw::Normal { mean, .. } => mean,
            ScalarLaw::TruncNormal { mean, sd, lo, hi } => {
                let n = Normal::new(0.0, 1.0).unwrap();
                let a = (lo - mean) / sd;
                let b = (hi - mean) / sd;
                let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
                let denom = n.cdf(b) - n.cdf(a);
                mean + sd * (phi(a) - phi(b)) / denom
            }
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        match *self {
            ScalarLaw::Constant(_) => 0.0,
            ScalarLaw::Uniform { lo, hi } => {
                if (lo..=hi).contains(&v) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ScalarLaw::Normal { mean, sd } => {
                let t = (v - mean) / sd;
                (-0.5 * t * t).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            ScalarLaw::TruncNormal { mean, sd, lo, hi } => {
                if !(lo..=hi).contains(&v) {
                    return 0.0;
                }
                let base = ScalarLaw::Normal { mean, sd };
                let mass = base.cdf(hi) - base.cdf(lo);
                base.pdf(v) / mass
            }
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => {
                if v < c {
                    0.0
                } else {
                    1.0
                }
            }
            ScalarLaw::Uniform { lo, hi } => ((v - lo) / (hi - lo)).clamp(0.0, 1.0),
            ScalarLaw::Normal { mean, sd } => Normal::new(mean, sd).unwrap().cdf(v),
            ScalarLaw::TruncNormal { mean, sd, lo, hi } => {
                let n = Normal::new(mean, sd).unwrap();
                ((n.cdf(v.clamp(lo, hi)) - n.cdf(lo)) / (n.cdf(hi) - n.cdf(lo))).clamp(0.0, 1.0)
            }
        }
    }

    /// Inverse cdf; `p` is clamped away from 0 and 1 for unbounded laws.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(1e-15, 1.0 - 1e-15);
        match *self {
            ScalarLaw::Constant(c) => c,
            ScalarLaw::Uniform { lo, hi } => lo + p * (hi - lo),
            ScalarLaw::Normal { mean, sd } => Normal::new(mean, sd).unwrap().inverse_cdf(p),
            ScalarLaw::TruncNormal { mean, sd, lo, hi } => {
                let n = Normal::new(mean, sd).unwrap();
                let (a, b) = (n.cdf(lo), n.cdf(hi));
                n.inverse_cdf(a + p * (b - a)).clamp(lo, hi)
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => c,
            ScalarLaw::Uniform { lo, hi } => rng.gen_range(lo..hi),
            ScalarLaw::Normal { mean, sd } => {
                let g: f64 = rng.sample(StandardNormal);
                mean + sd * g
            }
            ScalarLaw::TruncNormal { .. } => self.quantile(rng.gen::<f64>()),
        }
    }

    /// Smallest interval containing (essentially) all mass. Normal tails
    /// are cut at eight standard deviations.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ScalarLaw::Constant(c) => (c, c),
            ScalarLaw::Uniform { lo, hi } => (lo, hi),
            ScalarLaw::Normal { mean, sd } => (mean - 8.0 * sd, mean + 8.0 * sd),
            ScalarLaw::TruncNormal { lo, hi, .. } => (lo, hi),
        }
    }
}

/// Joint law for a latent tuple: independent marginals, optionally
/// coupled through a Gaussian copula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatentLaw {
    pub marginals: Vec<ScalarLaw>,
    /// Copula correlation matrix (row-major, k x k). `None` means
    /// independent components.
    pub copula_corr: Option<Vec<Vec<f64>>>,
}

impl LatentLaw {
    pub fn independent(marginals: Vec<ScalarLaw>) -> Self {
        Self { marginals, copula_corr: None }
    }

    /// Two marginals with copula correlation `rho`, the rest independent.
    pub fn pair_correlated(marginals: Vec<ScalarLaw>, i: usize, j: usize, rho: f64) -> Result<Self> {
        let k = marginals.len();
        if i >= k || j >= k || i == j {
            return Err(Error::InvalidParam("copula pair indices out of range".into()));
        }
        if !(-1.0..1.0).contains(&rho) {
            return Err(Error::InvalidParam(format!(
                "copula correlation {rho} must lie in (-1, 1)"
            )));
        }
        let mut corr = vec![vec![0.0; k]; k];
        for d in 0..k {
            corr[d][d] = 1.0;
        }
        corr[i][j] = rho;
        corr[j][i] = rho;
        Ok(Self { marginals, copula_corr: Some(corr) })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn validate(&self) -> Result<()> {
        for law in &self.marginals {
            law.validate()?;
        }
        if let Some(corr) = &self.copula_corr {
            let k = self.marginals.len();
            if corr.len() != k || corr.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidModel("copula matrix dimension mismatch".into()));
            }
            cholesky_corr(corr)?;
        }
        Ok(())
    }

    /// Draw a latent tuple.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        match &self.copula_corr {
            None => self.marginals.iter().map(|law| law.sample(rng)).collect(),
            Some(corr) => {
                let chol = cholesky_corr(corr).expect("validated copula");
                let k = self.marginals.len();
                let g: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
                let std_normal = Normal::new(0.0, 1.0).unwrap();
                (0..k)
                    .map(|i| {
                        let mut acc = 0.0;
                        for j in 0..=i {
                            acc += chol[i][j] * g[j];
                        }
                        self.marginals[i].quantile(std_normal.cdf(acc))
                    })
                    .collect()
            }
        }
    }
}

/// Lower Cholesky factor of a correlation matrix.
pub(crate) fn cholesky_corr(corr: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = corr.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        if (corr[i][i] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel("copula matrix must have unit diagonal".into()));
        }
        for j in 0..=i {
            if (corr[i][j] - corr[j][i]).abs() > 1e-12 {
                return Err(Error::InvalidModel("copula matrix must be symmetric".into()));
            }
            let mut sum = corr[i][j];
            for t in 0..j {
                sum -= l[i][t] * l[j][t];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::InvalidModel(
                        "copula matrix is not positive definite".into(),
                    ));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Draw a standard bivariate Gaussian pair with correlation `rho` and
/// map both coordinates to uniforms. Convenience for two-latent copulas.
pub(crate) fn bivariate_uniforms(rho: f64, rng: &mut impl Rng) -> (f64, f64) {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    let h = rho * g1 + (1.0 - rho * rho).sqrt() * g2;
    let n = Normal::new(0.0, 1.0).unwrap();
    (n.cdf(g1), n.cdf(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_quantile_and_cdf_are_inverse() {
        let law = ScalarLaw::Uniform { lo: -1.0, hi: 3.0 };
        for &p in &[0.1, 0.5, 0.9] {
            assert_relative_eq!(law.cdf(law.quantile(p)), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn truncated_normal_stays_in_bounds() {
        let law = ScalarLaw::TruncNormal { mean: 0.0, sd: 1.0, lo: -0.5, hi: 0.25 };
        let mut rng = rng::root(1);
        for _ in 0..500 {
            let v = law.sample(&mut rng);
            assert!((-0.5..=0.25).contains(&v));
        }
    }

    #[test]
    fn copula_pair_reproduces_requested_correlation() {
        let law = LatentLaw::pair_correlated(
            vec![
                ScalarLaw::Normal { mean: 0.0, sd: 1.0 },
                ScalarLaw::Normal { mean: 0.0, sd: 1.0 },
            ],
            0,
            1,
            0.6,
        )
        .unwrap();
        let mut rng = rng::root(11);
        let draws: Vec<Vec<f64>> = (0..20000).map(|_| law.sample(&mut rng)).collect();
        let mean0: f64 = draws.iter().map(|d| d[0]).sum::<f64>() / draws.len() as f64;
        let mean1: f64 = draws.iter().map(|d| d[1]).sum::<f64>() / draws.len() as f64;
        let mut cov = 0.0;
        let mut v0 = 0.0;
        let mut v1 = 0.0;
        for d in &draws {
            cov += (d[0] - mean0) * (d[1] - mean1);
            v0 += (d[0] - mean0).powi(2);
            v1 += (d[1] - mean1).powi(2);
        }
        let corr = cov / (v0 * v1).sqrt();
        // Gaussian marginals make copula correlation the plain correlation
        assert!((corr - 0.6).abs() < 0.03, "corr = {corr}");
    }

    #[test]
    fn invalid_correlation_is_rejected() {
        let marg = vec![
            ScalarLaw::Normal { mean: 0.0, sd: 1.0 },
            ScalarLaw::Normal { mean: 0.0, sd: 1.0 },
        ];
        assert!(LatentLaw::pair_correlated(marg, 0, 1, 1.0).is_err());
    }
}
