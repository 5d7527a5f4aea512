//! Priors for the kernel scale with envelopes
//! `C₁σ^{−s}e^{−D₁σ^{−γ}(log 1/σ)^t} ≤ g(σ) ≤ C₂σ^{−s}e^{−D₂σ^{−γ}(log 1/σ)^t}`
//! near zero.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalePriorA0 {
    /// `g(σ) = λ^ν/Γ(ν) σ^{−ν−1} e^{−λ/σ}`.
    InverseGamma { nu: f64, lambda: f64 },
    /// `g(σ) ∝ σ^{−s} exp(−D σ^{−γ} (log(1 + 1/σ))^t)` with `D = (D₁+D₂)/2`,
    /// which has the required envelope near zero for any `C₁ < C₂`.
    /// Unnormalized; `s > 1` keeps it integrable at infinity.
    Generic {
        s: f64,
        t: f64,
        gamma: f64,
        d1: f64,
        d2: f64,
        c1: f64,
        c2: f64,
    },
}

/// `(C₁, C₂, D₁, D₂, s, t, γ)` of the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
}

impl Envelope {
    fn ln_at(&self, c: f64, d: f64, sigma: f64) -> f64 {
        let log_inv = (1.0 / sigma).ln();
        let tail = if self.t == 0.0 { 1.0 } else { log_inv.powf(self.t) };
        c.ln() - self.s * sigma.ln() - d * sigma.powf(-self.gamma) * tail
    }

    pub fn ln_lower(&self, sigma: f64) -> f64 {
        self.ln_at(self.c1, self.d1, sigma)
    }

    pub fn ln_upper(&self, sigma: f64) -> f64 {
        self.ln_at(self.c2, self.d2, sigma)
    }
}

impl ScalePriorA0 {
    /// Default scale prior, `IG(2, 0.5)`.
    pub fn default_inverse_gamma() -> Self {
        ScalePriorA0::InverseGamma { nu: 2.0, lambda: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalePriorA0::InverseGamma { nu, lambda } => {
                if !(nu > 0.0 && lambda > 0.0) {
                    return Err(Error::InvalidParameter(format!("IG({nu}, {lambda})")));
                }
            }
            ScalePriorA0::Generic {
                s,
                t,
                gamma,
                d1,
                d2,
                c1,
                c2,
            } => {
                if !(s > 1.0 && t >= 0.0 && gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!("s = {s}, t = {t}, gamma = {gamma}")));
                }
                if !(d1 >= d2 && d2 > 0.0 && c2 > c1 && c1 > 0.0) {
                    return Err(Error::InvalidParameter(
                        "need D1 >= D2 > 0 and C2 > C1 > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// True when [`Self::logpdf`] includes the normalizing constant.
    pub fn is_normalized(&self) -> bool {
        matches!(self, ScalePriorA0::InverseGamma { .. })
    }

    pub fn logpdf(&self, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::NonPositiveSigma(sigma));
        }
        Ok(match *self {
            ScalePriorA0::InverseGamma { nu, lambda } => {
                nu * lambda.ln() - ln_gamma(nu) - (nu + 1.0) * sigma.ln() - lambda / sigma
            }
            ScalePriorA0::Generic {
                s, t, gamma, d1, d2, ..
            } => {
                let d = 0.5 * (d1 + d2);
                let tail = if t == 0.0 { 1.0 } else { (1.0 / sigma).ln_1p().powf(t) };
                -s * sigma.ln() - d * sigma.powf(-gamma) * tail
            }
        })
    }

    pub fn envelope(&self) -> Envelope {
        match *self {
            ScalePriorA0::InverseGamma { nu, lambda } => {
                let c = (nu * lambda.ln() - ln_gamma(nu)).exp();
                Envelope {
                    c1: c,
                    c2: c,
                    d1: lambda,
                    d2: lambda,
                    s: nu + 1.0,
                    t: 0.0,
                    gamma: 1.0,
                }
            }
            ScalePriorA0::Generic {
                s,
                t,
                gamma,
                d1,
                d2,
                c1,
                c2,
            } => Envelope {
                c1,
                c2,
                d1,
                d2,
                s,
                t,
                gamma,
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        match *self {
            ScalePriorA0::InverseGamma { nu, lambda } => {
                let g = Gamma::new(nu, 1.0 / lambda).unwrap().sample(rng);
                Ok(1.0 / g)
            }
            ScalePriorA0::Generic { .. } => {
                // inverse CDF on a fine grid in log σ
                let (lo, hi, n) = (-12.0f64, 12.0f64, 8192);
                let h = (hi - lo) / n as f64;
                let mut logs = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    let u = lo + k as f64 * h;
                    logs.push(self.logpdf(u.exp())? + u);
                }
                let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut cum = vec![0.0; n + 1];
                for k in 1..=n {
                    cum[k] = cum[k - 1] + 0.5 * h * ((logs[k - 1] - peak).exp() + (logs[k] - peak).exp());
                }
                let target = rng.random::<f64>() * cum[n];
                let k = cum.partition_point(|&c| c < target).clamp(1, n);
                let frac = (target - cum[k - 1]) / (cum[k] - cum[k - 1]).max(f64::MIN_POSITIVE);
                Ok((lo + (k as f64 - 1.0 + frac) * h).exp())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn inverse_gamma_mode() {
        let p = ScalePriorA0::InverseGamma { nu: 2.0, lambda: 1.0 };
        let mode = 1.0 / 3.0;
        let at = p.logpdf(mode).unwrap();
        assert!(at > p.logpdf(mode * 1.001).unwrap());
        assert!(at > p.logpdf(mode / 1.001).unwrap());
        assert!(p.logpdf(0.0).is_err());
    }

    #[test]
    fn inverse_gamma_envelope() {
        let p = ScalePriorA0::InverseGamma { nu: 3.0, lambda: 0.7 };
        let e = p.envelope();
        for k in 1..=200 {
            let s = 0.2 * k as f64 / 200.0;
            let g = p.logpdf(s).unwrap();
            assert!(e.ln_lower(s) <= g + 1e-12 * g.abs().max(1.0));
            assert!(g <= e.ln_upper(s) + 1e-12 * g.abs().max(1.0));
        }
    }

    #[test]
    fn generic_envelope_near_zero() {
        let p = ScalePriorA0::Generic {
            s: 2.0,
            t: 1.0,
            gamma: 1.0,
            d1: 1.2,
            d2: 0.8,
            c1: 0.5,
            c2: 2.0,
        };
        p.validate().unwrap();
        let e = p.envelope();
        for k in 1..=100 {
            let s = 1e-3 * k as f64;
            let g = p.logpdf(s).unwrap();
            assert!(e.ln_lower(s) <= g && g <= e.ln_upper(s), "sigma {s}");
        }
        let mut rng = seeded(2);
        for _ in 0..100 {
            assert!(p.sample(&mut rng).unwrap() > 0.0);
        }
    }
}
