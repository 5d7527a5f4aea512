//! Prior-mass lower bounds for stick weights, atom locations and N-IG
//! vectors, with Monte-Carlo estimators of the guarded events.
//!
//! Each bound has the shape `log P ≥ log C − c₁·x`, where the rate argument
//! `x` depends on the configuration and `(C, c₁)` are existential. The
//! constants are fitted on the smallest configuration by
//! [`fit_constants`] and then held fixed.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use statrs::function::beta::ln_beta;

use super::base::BaseMeasure;
use super::nig::{nig_density, nig_sample, NIGParams};
use super::stick::{stick_fractions, PYParams};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::special::neumaier_sum;

/// Monte-Carlo probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub draws: usize,
}

impl McEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = neumaier_sum(values.iter().copied()) / n;
        let var = neumaier_sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0).max(1.0);
        McEstimate {
            mean,
            se: (var / n).sqrt(),
            draws: values.len(),
        }
    }

    /// `log(mean + k·se)`, the optimistic end used when checking a lower bound.
    pub fn ln_upper(&self, k: f64) -> f64 {
        (self.mean + k * self.se).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedConstants {
    pub ln_c: f64,
    pub c1: f64,
}

impl FittedConstants {
    pub fn log_bound(&self, rate: f64) -> f64 {
        self.ln_c - self.c1 * rate
    }
}

/// `C = 1` and the smallest `c₁` with `log P ≥ −c₁ x` at every fitting
/// point `(x, log P)`. Fixing `C` lets `c₁` absorb per-atom constants, which
/// a single configuration size cannot separate from the intercept.
pub fn fit_constants(points: &[(f64, f64)]) -> Result<FittedConstants> {
    let c1 = points
        .iter()
        .filter(|(x, y)| y.is_finite() && *x > 0.0)
        .map(|(x, y)| -y / x)
        .fold(f64::NEG_INFINITY, f64::max);
    if !c1.is_finite() {
        return Err(Error::InvalidParameter("no usable fitting point".into()));
    }
    Ok(FittedConstants {
        ln_c: 0.0,
        c1: c1.max(1e-12),
    })
}

/// `v_max` over the first `N − 1` stick fractions; the last fraction is 1
/// for any probability vector and carries no information.
pub fn v_max(weights: &[f64]) -> f64 {
    let v = stick_fractions(weights);
    v[..v.len().saturating_sub(1)]
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Rate `N max{log(N/ε), dN log(1/(1 − v_max))}` of the stick bound.
pub fn py_sticks_rate(n: usize, eps: f64, v_max: f64, d: f64) -> Result<f64> {
    let nf = n as f64;
    if !(eps > 0.0 && eps < 1.0) || n == 0 {
        return Err(Error::PreconditionViolated(format!("N = {n}, eps = {eps}")));
    }
    if !(v_max >= 0.0 && v_max < 1.0) || !(2.0 * eps / (nf * nf) < 0.5 * (1.0 - v_max)) {
        return Err(Error::PreconditionViolated(format!(
            "2 eps / N^2 = {:.3e} must be below (1 - v_max)/2 = {:.3e}",
            2.0 * eps / (nf * nf),
            0.5 * (1.0 - v_max)
        )));
    }
    Ok(nf * (nf / eps).ln().max(d * nf * (1.0 / (1.0 - v_max)).ln()))
}

pub fn prior_mass_bound_py_sticks(
    n: usize,
    eps: f64,
    v_max: f64,
    d: f64,
    consts: &FittedConstants,
) -> Result<f64> {
    Ok(consts.log_bound(py_sticks_rate(n, eps, v_max, d)?))
}

/// Rate `N[log(Nα(ℝ)/(2ε)) + b a^δ]` of the location bound.
pub fn py_locations_rate(n: usize, eps: f64, a: f64, base: &BaseMeasure) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) || n == 0 {
        return Err(Error::PreconditionViolated(format!("N = {n}, eps = {eps}")));
    }
    if !(a >= 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "a = {a}: the tail form is only used for a >= 1"
        )));
    }
    let (b, delta) = base.tail();
    let nf = n as f64;
    Ok(nf * ((nf * base.total_mass / (2.0 * eps)).ln() + b * a.powf(delta)))
}

pub fn prior_mass_bound_py_locations(
    n: usize,
    eps: f64,
    a: f64,
    base: &BaseMeasure,
    consts: &FittedConstants,
) -> Result<f64> {
    Ok(consts.log_bound(py_locations_rate(n, eps, a, base)?))
}

/// Rate `N max{log(1/ε), log(1/(min z_{j0} − ε))}` of the N-IG bound.
pub fn nig_rate(eps: f64, z0: &[f64], alphas: &[f64]) -> Result<f64> {
    let n = z0.len();
    if alphas.len() != n {
        return Err(Error::InvalidParameter("z0 and alphas differ in length".into()));
    }
    let zmin = z0.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(eps > 0.0 && eps < 1.0) || !(zmin > eps) || !(eps <= 1.0 / n as f64) {
        return Err(Error::PreconditionViolated(format!(
            "need eps <= 1/N and min z0 = {zmin} > eps = {eps}"
        )));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::PreconditionViolated("alphas must lie in (0, 1]".into()));
    }
    Ok(n as f64 * (1.0 / eps).ln().max((1.0 / (zmin - eps)).ln()))
}

pub fn prior_mass_bound_nig(
    eps: f64,
    z0: &[f64],
    alphas: &[f64],
    consts: &FittedConstants,
) -> Result<f64> {
    Ok(consts.log_bound(nig_rate(eps, z0, alphas)?))
}

/// Event `Σ_j Σ_{h≤j} |V_h − v_h| ≤ 2ε, min V_j > ε/N²`, written with the
/// weight `N − h + 1` of each `|V_h − v_h|`.
fn sticks_event(v: &[f64], target: &[f64], eps: f64) -> bool {
    let n = target.len();
    let floor = eps / (n * n) as f64;
    let mut acc = 0.0;
    for (h, (&x, &t)) in v.iter().zip(target).enumerate() {
        if x <= floor {
            return false;
        }
        acc += (n - h) as f64 * (x - t).abs();
    }
    acc <= 2.0 * eps
}

/// Direct simulation of the sticks.
pub fn py_sticks_mc<R: Rng + ?Sized>(
    params: &PYParams,
    weights: &[f64],
    eps: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let target = stick_fractions(weights);
    let laws: Vec<_> = (1..=target.len()).map(|j| params.stick_law(j)).collect();
    let mut v = vec![0.0; target.len()];
    let hits: Vec<f64> = (0..draws)
        .map(|_| {
            for (x, law) in v.iter_mut().zip(&laws) {
                *x = law.sample(rng);
            }
            if sticks_event(&v, &target, eps) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    McEstimate::from_values(&hits)
}

/// Importance sampling of the stick event: each `V_h` uniform on the box
/// `|V_h − v_h| ≤ 2ε/(N − h + 1)`, which contains the event, weighted by the
/// Beta densities.
pub fn py_sticks_is<R: Rng + ?Sized>(
    params: &PYParams,
    weights: &[f64],
    eps: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let target = stick_fractions(weights);
    let n = target.len();
    let floor = eps / (n * n) as f64;
    let boxes: Vec<(f64, f64)> = target
        .iter()
        .enumerate()
        .map(|(h, &t)| {
            let r = 2.0 * eps / (n - h) as f64;
            ((t - r).max(floor), (t + r).min(1.0))
        })
        .collect();
    let (a, c, d) = (1.0 - params.d, params.c, params.d);
    let ln_norm: Vec<f64> = (1..=n).map(|j| ln_beta(a, c + d * j as f64)).collect();
    let ln_vol: f64 = boxes.iter().map(|(lo, hi)| (hi - lo).ln()).sum();
    let mut v = vec![0.0; n];
    let values: Vec<f64> = (0..draws)
        .map(|_| {
            for (x, (lo, hi)) in v.iter_mut().zip(&boxes) {
                *x = rng.random_range(*lo..*hi);
            }
            if !sticks_event(&v, &target, eps) {
                return 0.0;
            }
            let mut ln_w = ln_vol;
            for (j, &x) in v.iter().enumerate() {
                let b = c + d * (j + 1) as f64;
                ln_w += (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_norm[j];
            }
            ln_w.exp()
        })
        .collect();
    McEstimate::from_values(&values)
}

/// `P(Σ|Z_j − z_j| ≤ ε)` for i.i.d. base draws, by sampling uniformly in
/// the L¹ ball and weighting by the base density.
pub fn py_locations_is<R: Rng + ?Sized>(
    base: &BaseMeasure,
    z: &[f64],
    eps: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let n = z.len();
    // volume (2ε)^N / N!
    let ln_vol = n as f64 * (2.0 * eps).ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let mut e = vec![0.0; n + 1];
    let values: Vec<f64> = (0..draws)
        .map(|_| {
            for x in e.iter_mut() {
                *x = Exp1.sample(rng);
            }
            let total: f64 = e.iter().sum();
            let mut dens = ln_vol;
            for (j, &zj) in z.iter().enumerate() {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let theta = zj + sign * eps * e[j] / total;
                let p = base.density(theta);
                if p <= 0.0 {
                    return 0.0;
                }
                dens += p.ln();
            }
            dens.exp()
        })
        .collect();
    McEstimate::from_values(&values)
}

/// Event `Σ|Z_j − z_{j0}| ≤ 2ε, min Z_j > ε²/2` by direct N-IG sampling.
pub fn nig_event_mc<R: Rng + ?Sized>(
    params: &NIGParams,
    z0: &[f64],
    eps: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let hits: Vec<f64> = (0..draws)
        .map(|_| {
            let z = nig_sample(params, rng);
            let dist: f64 = z.iter().zip(z0).map(|(a, b)| (a - b).abs()).sum();
            let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
            if dist <= 2.0 * eps && zmin > 0.5 * eps * eps {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    McEstimate::from_values(&hits)
}

/// The same event by importance sampling against the density: the first
/// `N − 1` coordinates uniform in the L¹ ball of radius `2ε` around `z0`.
pub fn nig_event_is<R: Rng + ?Sized>(
    params: &NIGParams,
    z0: &[f64],
    eps: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let n = z0.len();
    let m = n - 1;
    let r = 2.0 * eps;
    let ln_vol = m as f64 * (2.0 * r).ln() - (1..=m).map(|k| (k as f64).ln()).sum::<f64>();
    let mut e = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let values: Vec<f64> = (0..draws)
        .map(|_| {
            for x in e.iter_mut() {
                *x = Exp1.sample(rng);
            }
            let total: f64 = e.iter().sum();
            for j in 0..m {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                z[j] = z0[j] + sign * r * e[j] / total;
            }
            z[m] = 1.0 - z[..m].iter().sum::<f64>();
            let dist: f64 = z.iter().zip(z0).map(|(a, b)| (a - b).abs()).sum();
            let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
            if dist > r || zmin <= 0.5 * eps * eps {
                return 0.0;
            }
            match nig_density(&z, params) {
                Ok(f) => (ln_vol + f.ln()).exp(),
                Err(_) => 0.0,
            }
        })
        .collect();
    McEstimate::from_values(&values)
}

/// Which prior-mass lemma a suite checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    PySticks,
    PyLocations,
    Nig,
}

impl std::str::FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "py-sticks" | "sticks" => Ok(Lemma::PySticks),
            "py-locations" | "locations" => Ok(Lemma::PyLocations),
            "nig" => Ok(Lemma::Nig),
            other => Err(Error::InvalidParameter(format!("unknown lemma `{other}`"))),
        }
    }
}

/// One configuration of a prior-mass suite.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMassRow {
    pub lemma: Lemma,
    pub n: usize,
    pub eps: f64,
    /// True for the configurations the constants were fitted on.
    pub fitting: bool,
    pub rate: f64,
    pub mc: McEstimate,
    pub log_bound: f64,
    /// `log_bound ≤ log(mc + 3 se)`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub fit_n: usize,
    pub fit_eps: Vec<f64>,
    pub test_n: Vec<usize>,
    pub test_eps: Vec<f64>,
    pub draws: usize,
    pub seed: u64,
    /// Stick parameters for [`Lemma::PySticks`].
    pub py: PYParams,
    /// Base for [`Lemma::PyLocations`].
    pub base: BaseMeasure,
    /// Common N-IG parameter for every coordinate.
    pub nig_alpha: f64,
}

impl SuiteConfig {
    pub fn default_for(lemma: Lemma) -> Self {
        let base = BaseMeasure::standard_normal();
        let py = PYParams::new(1.0, 0.25, base).unwrap();
        let (fit_n, fit_eps, test_n, test_eps) = match lemma {
            Lemma::PySticks => (
                2,
                vec![0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
                vec![3, 4, 5, 6],
                vec![0.1, 0.03, 0.01],
            ),
            Lemma::PyLocations => (
                2,
                vec![0.5, 0.2, 0.1, 1e-2, 1e-3, 1e-4],
                vec![3, 4, 5, 6],
                vec![0.5, 0.2, 0.1],
            ),
            Lemma::Nig => (
                2,
                vec![0.45, 0.3, 0.1, 1e-2, 1e-3, 1e-4],
                vec![3, 4],
                vec![0.2, 0.15, 0.1],
            ),
        };
        SuiteConfig {
            fit_n,
            fit_eps,
            test_n,
            test_eps,
            draws: 200_000,
            seed: 20_240_611,
            py,
            base,
            nig_alpha: 0.5,
        }
    }
}

/// Geometric weights `p_j ∝ 2^{−j}`, the stick-lemma target.
pub fn geometric_weights(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|j| 0.5f64.powi(j as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Location targets `z_j` equally spaced on `[−a, a]` with `a = 1`.
pub fn location_targets(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect()
}

fn evaluate(lemma: Lemma, cfg: &SuiteConfig, n: usize, eps: f64, stream_id: u64) -> Result<(f64, McEstimate)> {
    let mut rng = stream(cfg.seed, stream_id);
    match lemma {
        Lemma::PySticks => {
            let w = geometric_weights(n);
            let rate = py_sticks_rate(n, eps, v_max(&w), cfg.py.d)?;
            Ok((rate, py_sticks_is(&cfg.py, &w, eps, cfg.draws, &mut rng)))
        }
        Lemma::PyLocations => {
            let z = location_targets(n);
            let a = z.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let rate = py_locations_rate(n, eps, a, &cfg.base)?;
            Ok((rate, py_locations_is(&cfg.base, &z, eps, cfg.draws, &mut rng)))
        }
        Lemma::Nig => {
            let alphas = vec![cfg.nig_alpha; n];
            let z0 = vec![1.0 / n as f64; n];
            let rate = nig_rate(eps, &z0, &alphas)?;
            let params = NIGParams::new(alphas)?;
            Ok((rate, nig_event_is(&params, &z0, eps, cfg.draws, &mut rng)))
        }
    }
}

/// Fits `(C, c₁)` on `fit_n × fit_eps` and checks every `test_n × test_eps`
/// configuration. Configurations run in parallel on independent streams.
pub fn prior_mass_suite(lemma: Lemma, cfg: &SuiteConfig) -> Result<(FittedConstants, Vec<PriorMassRow>)> {
    let mut configs: Vec<(usize, f64, bool)> = cfg.fit_eps.iter().map(|&e| (cfg.fit_n, e, true)).collect();
    for &n in &cfg.test_n {
        for &e in &cfg.test_eps {
            configs.push((n, e, false));
        }
    }
    let results: Vec<Result<(f64, McEstimate)>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, &(n, e, _))| evaluate(lemma, cfg, n, e, i as u64))
        .collect();
    let mut evaluated = Vec::with_capacity(configs.len());
    for r in results {
        evaluated.push(r?);
    }
    let fit_points: Vec<(f64, f64)> = configs
        .iter()
        .zip(&evaluated)
        .filter(|(c, _)| c.2)
        .map(|(_, (rate, mc))| (*rate, mc.mean.ln()))
        .collect();
    let consts = fit_constants(&fit_points)?;
    let rows = configs
        .iter()
        .zip(evaluated)
        .map(|(&(n, eps, fitting), (rate, mc))| {
            let log_bound = consts.log_bound(rate);
            PriorMassRow {
                lemma,
                n,
                eps,
                fitting,
                rate,
                mc,
                log_bound,
                holds: log_bound <= mc.ln_upper(3.0),
            }
        })
        .collect();
    Ok((consts, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn fit_line_sits_below_points() {
        let pts = [(1.0, -1.0), (2.0, -2.2), (3.0, -2.9)];
        let c = fit_constants(&pts).unwrap();
        for (x, y) in pts {
            assert!(c.log_bound(x) <= y + 1e-12);
        }
        assert!((c.c1 - 1.1).abs() < 1e-12);
    }

    #[test]
    fn stick_bound_monotone_in_n() {
        let c = FittedConstants { ln_c: 0.0, c1: 1.0 };
        let mut prev = f64::INFINITY;
        for n in 2..10 {
            let b = prior_mass_bound_py_sticks(n, 0.05, 0.5, 0.25, &c).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(matches!(
            prior_mass_bound_py_sticks(2, 0.9, 0.9, 0.0, &c),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn dirichlet_stick_rate_is_log_form() {
        let w = geometric_weights(4);
        let r = py_sticks_rate(4, 0.01, v_max(&w), 0.0).unwrap();
        assert!((r - 4.0 * (400.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn location_bound_increases_with_eps() {
        let c = FittedConstants { ln_c: 0.0, c1: 1.0 };
        let base = BaseMeasure::standard_normal();
        let a = prior_mass_bound_py_locations(3, 0.1, 1.0, &base, &c).unwrap();
        let b = prior_mass_bound_py_locations(3, 0.2, 1.0, &base, &c).unwrap();
        assert!(b > a);
    }

    #[test]
    fn nig_bound_blows_up_at_the_boundary() {
        let c = FittedConstants { ln_c: 0.0, c1: 1.0 };
        let alphas = [0.5, 0.5, 0.5];
        let far = prior_mass_bound_nig(0.1, &[0.4, 0.3, 0.3], &alphas, &c).unwrap();
        let near = prior_mass_bound_nig(0.1, &[0.8, 0.1 + 1e-9, 0.1 - 1e-9 + 0.0], &alphas, &c);
        assert!(near.is_err());
        let close = prior_mass_bound_nig(0.1, &[0.79, 0.1 + 1e-6, 0.11 - 1e-6], &alphas, &c).unwrap();
        assert!(close < far - 10.0);
    }

    #[test]
    fn nig_rate_doubles_with_n() {
        let r = |n: usize| {
            let z0 = vec![1.0 / n as f64; n];
            nig_rate(0.01, &z0, &vec![0.5; n]).unwrap()
        };
        assert!((r(8) / r(4) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sticks_direct_and_importance_agree() {
        let p = PYParams::new(1.0, 0.0, BaseMeasure::standard_normal()).unwrap();
        let w = geometric_weights(3);
        let direct = py_sticks_mc(&p, &w, 0.1, 400_000, &mut seeded(11));
        let is = py_sticks_is(&p, &w, 0.1, 200_000, &mut seeded(12));
        let se = (direct.se.powi(2) + is.se.powi(2)).sqrt();
        assert!((direct.mean - is.mean).abs() < 4.0 * se, "{direct:?} vs {is:?}");
    }

    #[test]
    fn single_location_ball_matches_quadrature() {
        let base = BaseMeasure::standard_normal();
        let est = py_locations_is(&base, &[1.0], 0.2, 100_000, &mut seeded(5));
        let exact = base.interval_mass(0.8, 1.2);
        assert!((est.mean / exact - 1.0).abs() < 0.05);
    }

    #[test]
    fn nig_event_estimators_agree() {
        let params = NIGParams::new(vec![0.5; 3]).unwrap();
        let z0 = [1.0 / 3.0; 3];
        let direct = nig_event_mc(&params, &z0, 0.15, 200_000, &mut seeded(8));
        let is = nig_event_is(&params, &z0, 0.15, 200_000, &mut seeded(9));
        let se = (direct.se.powi(2) + is.se.powi(2)).sqrt();
        assert!((direct.mean - is.mean).abs() < 4.0 * se, "{direct:?} vs {is:?}");
    }
}
