//! Base measures `α = α(ℝ)·ᾱ` with tails `α′(θ) ∝ e^{−b|θ|^δ}`.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseFamily {
    /// `N(mean, sd²)`, optionally truncated to `[lo, hi]`.
    Normal {
        mean: f64,
        sd: f64,
        truncate: Option<(f64, f64)>,
    },
    Laplace { loc: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseMeasure {
    pub family: BaseFamily,
    /// `α(ℝ)`.
    pub total_mass: f64,
}

impl BaseMeasure {
    pub fn normal(mean: f64, sd: f64, total_mass: f64) -> Result<Self> {
        Self::new(
            BaseFamily::Normal {
                mean,
                sd,
                truncate: None,
            },
            total_mass,
        )
    }

    pub fn standard_normal() -> Self {
        Self::normal(0.0, 1.0, 1.0).unwrap()
    }

    pub fn laplace(loc: f64, scale: f64, total_mass: f64) -> Result<Self> {
        Self::new(BaseFamily::Laplace { loc, scale }, total_mass)
    }

    pub fn new(family: BaseFamily, total_mass: f64) -> Result<Self> {
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("base total mass {total_mass}")));
        }
        match family {
            BaseFamily::Normal { sd, truncate, .. } => {
                if !(sd > 0.0) {
                    return Err(Error::InvalidParameter(format!("base sd {sd}")));
                }
                if let Some((lo, hi)) = truncate {
                    if !(lo < hi) {
                        return Err(Error::InvalidSupport(format!("[{lo}, {hi}]")));
                    }
                }
            }
            BaseFamily::Laplace { scale, .. } => {
                if !(scale > 0.0) {
                    return Err(Error::InvalidParameter(format!("base scale {scale}")));
                }
            }
        }
        Ok(BaseMeasure { family, total_mass })
    }

    /// `(b, δ)` of the tail law. Truncated bases have no tail; they report
    /// the untruncated constants.
    pub fn tail(&self) -> (f64, f64) {
        match self.family {
            BaseFamily::Normal { sd, .. } => (0.5 / (sd * sd), 2.0),
            BaseFamily::Laplace { scale, .. } => (1.0 / scale, 1.0),
        }
    }

    fn normal_parts(mean: f64, sd: f64, truncate: Option<(f64, f64)>) -> (Normal, f64, f64) {
        let n = Normal::new(mean, sd).unwrap();
        let (lo, hi) = truncate
            .map(|(a, b)| (n.cdf(a), n.cdf(b)))
            .unwrap_or((0.0, 1.0));
        (n, lo, hi)
    }

    /// Density of the normalized base `ᾱ`.
    pub fn density(&self, theta: f64) -> f64 {
        match self.family {
            BaseFamily::Normal { mean, sd, truncate } => {
                if let Some((a, b)) = truncate {
                    if theta < a || theta > b {
                        return 0.0;
                    }
                }
                let (_, lo, hi) = Self::normal_parts(mean, sd, truncate);
                let z = (theta - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt()) / (hi - lo)
            }
            BaseFamily::Laplace { loc, scale } => (-(theta - loc).abs() / scale).exp() / (2.0 * scale),
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        match self.family {
            BaseFamily::Normal { mean, sd, truncate } => {
                let (n, lo, hi) = Self::normal_parts(mean, sd, truncate);
                ((n.cdf(theta) - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
            BaseFamily::Laplace { loc, scale } => {
                let z = (theta - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
        }
    }

    /// `ᾱ([lo, hi])`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self.family {
            BaseFamily::Normal { mean, sd, truncate } => {
                let (n, lo, hi) = Self::normal_parts(mean, sd, truncate);
                n.inverse_cdf(lo + u * (hi - lo))
            }
            BaseFamily::Laplace { loc, scale } => {
                if u < 0.5 {
                    loc + scale * (2.0 * u).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - u)).ln()
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            BaseFamily::Normal {
                mean,
                sd,
                truncate: None,
            } => mean + sd * rng.sample::<f64, _>(rand_distr::StandardNormal),
            _ => {
                // open interval keeps the quantile finite
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                self.quantile(u)
            }
        }
    }
}
