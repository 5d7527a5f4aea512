//! Desk-scale posterior sampling for Gaussian location mixtures with a
//! random scale, and the contraction and mixing-recovery experiments built
//! on it.
//!
//! Two samplers share one state layout (atoms, weights, allocations, σ):
//!
//! * Pitman-Yor / Dirichlet priors use the truncated blocked Gibbs sampler
//!   with `L` sticks, the last stick set to one.
//! * N-IG priors are represented on a fixed partition of the line. The cell
//!   masses are normalized inverse-Gaussian increments, updated with the
//!   latent `u ~ Gamma(n, ΣV)` that makes the increments conditionally
//!   independent; each cell carries one atom drawn from the base restricted
//!   to the cell.
//!
//! The scale is updated by slice sampling on `log σ`.

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::gridfn::{Grid, GridFunction};
use crate::measure::DiscreteMixingMeasure;
use crate::metrics::{kl_divergence, wasserstein};
use crate::priors::base::{BaseFamily, BaseMeasure};
use crate::priors::nig::inverse_gaussian;
use crate::priors::{PYParams, ScalePriorA0};
use crate::rng::{replicate_seed, stream};
use crate::special::neumaier_sum;

/// Minimum number of retained draws for [`posterior_mean_density`].
pub const MIN_DRAWS: usize = 50;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub enum MixingPrior {
    PitmanYor(PYParams),
    /// N-IG process with base `base`, represented on `cells` equal cells of
    /// `[lo, hi]`; the two outer cells extend to `∓∞`.
    NigPartition {
        base: BaseMeasure,
        cells: usize,
        lo: f64,
        hi: f64,
    },
}

impl MixingPrior {
    /// 64 cells on `[−8, 8]`.
    pub fn nig(base: BaseMeasure) -> Self {
        MixingPrior::NigPartition {
            base,
            cells: 64,
            lo: -8.0,
            hi: 8.0,
        }
    }

    pub fn base(&self) -> &BaseMeasure {
        match self {
            MixingPrior::PitmanYor(p) => &p.base,
            MixingPrior::NigPartition { base, .. } => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub prior: MixingPrior,
    pub scale_prior: ScalePriorA0,
    /// Holds σ at this value instead of sampling it.
    pub fixed_sigma: Option<f64>,
    /// Number of sticks `L` (Pitman-Yor only).
    pub truncation: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Largest acceptable mass on the last, forced stick.
    pub remainder_tol: f64,
    /// `false` runs the chain on the prior alone.
    pub likelihood: bool,
}

impl FitConfig {
    /// DP with `α = N(0, 2²)`, `α(ℝ) = 1`, scale prior `IG(2, 0.5)`, `L = 50`.
    pub fn dirichlet_default() -> Self {
        let base = BaseMeasure::normal(0.0, 2.0, 1.0).unwrap();
        FitConfig {
            prior: MixingPrior::PitmanYor(PYParams::dirichlet(base)),
            scale_prior: ScalePriorA0::default_inverse_gamma(),
            fixed_sigma: None,
            truncation: 50,
            iterations: 2000,
            burn_in: 1000,
            thin: 5,
            seed: 1,
            remainder_tol: 1e-4,
            likelihood: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.iterations <= self.burn_in {
            return bad(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            ));
        }
        if self.thin == 0 {
            return bad("thin must be at least 1".into());
        }
        if !(self.remainder_tol > 0.0 && self.remainder_tol < 1.0) {
            return bad(format!("remainder tolerance {}", self.remainder_tol));
        }
        if let Some(s) = self.fixed_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("fixed sigma {s}"));
            }
        }
        self.scale_prior.validate()?;
        match &self.prior {
            MixingPrior::PitmanYor(p) => {
                PYParams::new(p.c, p.d, p.base)?;
                if self.truncation < 10 {
                    return bad(format!("truncation level {} is below 10", self.truncation));
                }
            }
            MixingPrior::NigPartition { cells, lo, hi, .. } => {
                if *cells < 2 || !(lo < hi) {
                    return bad(format!("partition of [{lo}, {hi}] into {cells} cells"));
                }
            }
        }
        Ok(())
    }

    fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraw {
    pub mixing: DiscreteMixingMeasure,
    pub sigma: f64,
    /// `Σ log f_{F,σ}(X_i)`; zero for prior-only chains.
    pub loglik: f64,
    /// Stick fractions in label order (empty for N-IG).
    pub sticks: Vec<f64>,
    /// Mass of the last stick, which absorbs the truncation remainder.
    pub tail_mass: f64,
}

/// Diagnostics that do not stop the chain.
#[derive(Debug, Clone, PartialEq)]
pub enum NonConvergenceWarning {
    /// The running average of the log-likelihood fell over the second half
    /// of burn-in.
    LoglikDrift { mid: f64, end: f64 },
    /// Some retained draw put more than the tolerance on the last stick.
    TruncationRemainder { max_tail: f64, tol: f64 },
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub draws: Vec<PosteriorDraw>,
    pub warnings: Vec<NonConvergenceWarning>,
    /// Log-likelihood at every burn-in sweep.
    pub burn_in_trace: Vec<f64>,
}

/// Mixture state shared by both samplers.
struct State {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    sticks: Vec<f64>,
    sigma: f64,
    alloc: Vec<usize>,
}

/// Draw from `N(mean, sd²)` restricted to `[lo, hi]` (infinite ends allowed).
pub fn truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    if a >= 3.0 {
        mean + sd * tail_normal(a, b, rng)
    } else if b <= -3.0 {
        mean - sd * tail_normal(-b, -a, rng)
    } else {
        let std = Normal::new(0.0, 1.0).unwrap();
        let (pa, pb) = (std.cdf(a), std.cdf(b));
        let u = pa + rng.random::<f64>() * (pb - pa);
        let z = std.inverse_cdf(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
        (mean + sd * z).clamp(lo, hi)
    }
}

/// Standard normal on `[a, b]` with `a > 0`, by exponential rejection
/// (uniform rejection when the interval is short against `1/a`).
fn tail_normal<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b - a < 1.0 / a {
        loop {
            let z = a + (b - a) * rng.random::<f64>();
            if rng.random::<f64>() <= (-0.5 * (z * z - a * a)).exp() {
                return z;
            }
        }
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / rate;
        if z > b {
            continue;
        }
        if rng.random::<f64>() <= (-0.5 * (z - rate).powi(2)).exp() {
            return z;
        }
    }
}

/// One draw from the base restricted to `[lo, hi]`.
fn base_restricted<R: Rng + ?Sized>(base: &BaseMeasure, lo: f64, hi: f64, rng: &mut R) -> f64 {
    match base.family {
        BaseFamily::Normal { mean, sd, truncate } => {
            let (l, h) = clip(truncate, lo, hi);
            truncated_normal(mean, sd, l, h, rng)
        }
        BaseFamily::Laplace { .. } => {
            let (pa, pb) = (base.cdf(lo), base.cdf(hi));
            let u = pa + rng.random::<f64>() * (pb - pa);
            base.quantile(u.clamp(f64::EPSILON, 1.0 - f64::EPSILON)).clamp(lo, hi)
        }
    }
}

fn clip(truncate: Option<(f64, f64)>, lo: f64, hi: f64) -> (f64, f64) {
    match truncate {
        Some((a, b)) => (lo.max(a), hi.min(b)),
        None => (lo, hi),
    }
}

/// Atom update given the points allocated to it: conjugate for normal bases,
/// random-walk Metropolis otherwise.
fn update_atom<R: Rng + ?Sized>(
    current: f64,
    base: &BaseMeasure,
    (lo, hi): (f64, f64),
    count: usize,
    sum: f64,
    points: &[f64],
    sigma: f64,
    rng: &mut R,
) -> f64 {
    if count == 0 {
        return base_restricted(base, lo, hi, rng);
    }
    match base.family {
        BaseFamily::Normal { mean, sd, truncate } => {
            let prec = 1.0 / (sd * sd) + count as f64 / (sigma * sigma);
            let m = (mean / (sd * sd) + sum / (sigma * sigma)) / prec;
            let (l, h) = clip(truncate, lo, hi);
            truncated_normal(m, prec.sqrt().recip(), l, h, rng)
        }
        BaseFamily::Laplace { .. } => {
            let target = |t: f64| {
                let p = base.density(t);
                if p <= 0.0 || t < lo || t > hi {
                    return f64::NEG_INFINITY;
                }
                p.ln() - points.iter().map(|x| (x - t).powi(2)).sum::<f64>() / (2.0 * sigma * sigma)
            };
            let step = sigma / (count as f64).sqrt();
            let mut t = current;
            let mut lt = target(t);
            for _ in 0..5 {
                let prop = t + step * rng.sample::<f64, _>(StandardNormal);
                let lp = target(prop);
                if lp - lt >= rng.random::<f64>().ln() {
                    t = prop;
                    lt = lp;
                }
            }
            t
        }
    }
}

/// Stepping-out slice sampler on `y = log σ`.
fn slice_log_sigma<R: Rng + ?Sized>(sigma: f64, target: impl Fn(f64) -> f64, rng: &mut R) -> f64 {
    let width = 0.5;
    let y0 = sigma.ln();
    let level = target(y0) + rng.random::<f64>().ln();
    let mut left = y0 - width * rng.random::<f64>();
    let mut right = left + width;
    for _ in 0..50 {
        if target(left) <= level {
            break;
        }
        left -= width;
    }
    for _ in 0..50 {
        if target(right) <= level {
            break;
        }
        right += width;
    }
    loop {
        let y = left + (right - left) * rng.random::<f64>();
        if target(y) > level {
            return y.exp();
        }
        if y < y0 {
            left = y;
        } else {
            right = y;
        }
        if right - left < 1e-12 {
            return sigma;
        }
    }
}

fn update_sigma<R: Rng + ?Sized>(state: &State, data: &[f64], cfg: &FitConfig, rng: &mut R) -> f64 {
    if let Some(s) = cfg.fixed_sigma {
        return s;
    }
    let (n, ss) = if cfg.likelihood {
        let ss = neumaier_sum(
            data.iter()
                .zip(&state.alloc)
                .map(|(x, &j)| (x - state.atoms[j]).powi(2)),
        );
        (data.len() as f64, ss)
    } else {
        (0.0, 0.0)
    };
    let prior = cfg.scale_prior;
    let target = |y: f64| {
        let s = y.exp();
        let lp = prior.logpdf(s).unwrap_or(f64::NEG_INFINITY);
        lp + y - n * y - ss / (2.0 * s * s)
    };
    slice_log_sigma(state.sigma, target, rng)
}

/// Resamples every allocation: `P(s_i = j) ∝ w_j φ_σ(x_i − θ_j)`.
fn update_allocations<R: Rng + ?Sized>(state: &mut State, data: &[f64], rng: &mut R) {
    let k = state.atoms.len();
    let inv = 0.5 / (state.sigma * state.sigma);
    let ln_w: Vec<f64> = state
        .weights
        .iter()
        .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut logits = vec![0.0; k];
    for (i, &x) in data.iter().enumerate() {
        let mut peak = f64::NEG_INFINITY;
        for j in 0..k {
            let l = ln_w[j] - (x - state.atoms[j]).powi(2) * inv;
            logits[j] = l;
            peak = peak.max(l);
        }
        let mut total = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - peak).exp();
            total += *l;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = k - 1;
        for (j, &p) in logits.iter().enumerate() {
            if u < p {
                pick = j;
                break;
            }
            u -= p;
        }
        state.alloc[i] = pick;
    }
}

/// `Σ_i log Σ_j w_j φ_σ(x_i − θ_j)`.
pub fn mixture_loglik(mixing: &DiscreteMixingMeasure, sigma: f64, data: &[f64]) -> f64 {
    let inv = 0.5 / (sigma * sigma);
    let norm = -sigma.ln() - LN_SQRT_2PI;
    let ln_w: Vec<f64> = mixing.weights().iter().map(|w| w.ln()).collect();
    let mut terms = Vec::with_capacity(data.len());
    let mut buf = vec![0.0; ln_w.len()];
    for &x in data {
        let mut peak = f64::NEG_INFINITY;
        for (b, (&a, &lw)) in buf.iter_mut().zip(mixing.atoms().iter().zip(&ln_w)) {
            *b = lw - (x - a).powi(2) * inv;
            peak = peak.max(*b);
        }
        let s: f64 = buf.iter().map(|b| (b - peak).exp()).sum();
        terms.push(peak + s.ln() + norm);
    }
    neumaier_sum(terms)
}

struct Stats {
    counts: Vec<usize>,
    sums: Vec<f64>,
    members: Vec<Vec<f64>>,
}

fn cluster_stats(state: &State, data: &[f64], keep_members: bool) -> Stats {
    let k = state.atoms.len();
    let mut counts = vec![0; k];
    let mut sums = vec![0.0; k];
    let mut members = vec![Vec::new(); if keep_members { k } else { 0 }];
    for (&x, &j) in data.iter().zip(&state.alloc) {
        counts[j] += 1;
        sums[j] += x;
        if keep_members {
            members[j].push(x);
        }
    }
    Stats {
        counts,
        sums,
        members,
    }
}

fn needs_members(base: &BaseMeasure) -> bool {
    matches!(base.family, BaseFamily::Laplace { .. })
}

fn py_sweep<R: Rng + ?Sized>(state: &mut State, data: &[f64], cfg: &FitConfig, p: &PYParams, rng: &mut R) {
    let l = state.atoms.len();
    if cfg.likelihood {
        update_allocations(state, data, rng);
    }
    let stats = if cfg.likelihood {
        cluster_stats(state, data, needs_members(&p.base))
    } else {
        Stats {
            counts: vec![0; l],
            sums: vec![0.0; l],
            members: Vec::new(),
        }
    };
    // V_j | s ~ Beta(1 − d + n_j, c + d j + Σ_{h>j} n_h)
    let mut above: usize = stats.counts.iter().sum();
    let mut remainder = 1.0;
    for j in 0..l {
        above -= stats.counts[j];
        let v = if j + 1 == l {
            1.0
        } else {
            let a = 1.0 - p.d + stats.counts[j] as f64;
            let b = p.c + p.d * (j + 1) as f64 + above as f64;
            Beta::new(a, b).unwrap().sample(rng)
        };
        state.sticks[j] = v;
        state.weights[j] = v * remainder;
        remainder *= 1.0 - v;
    }
    let empty: &[f64] = &[];
    for j in 0..l {
        let pts = stats.members.get(j).map(|v| v.as_slice()).unwrap_or(empty);
        state.atoms[j] = update_atom(
            state.atoms[j],
            &p.base,
            (f64::NEG_INFINITY, f64::INFINITY),
            stats.counts[j],
            stats.sums[j],
            pts,
            state.sigma,
            rng,
        );
    }
    state.sigma = update_sigma(state, data, cfg, rng);
}

/// Cell bounds and base masses `α(A_k)` of the N-IG partition.
fn nig_cells(base: &BaseMeasure, cells: usize, lo: f64, hi: f64) -> (Vec<(f64, f64)>, Vec<f64>) {
    let h = (hi - lo) / cells as f64;
    let bounds: Vec<(f64, f64)> = (0..cells)
        .map(|k| {
            let a = if k == 0 { f64::NEG_INFINITY } else { lo + k as f64 * h };
            let b = if k + 1 == cells { f64::INFINITY } else { lo + (k + 1) as f64 * h };
            (a, b)
        })
        .collect();
    let alphas = bounds
        .iter()
        .map(|&(a, b)| base.total_mass * base.interval_mass(a.max(-1e300), b.min(1e300)))
        .collect();
    (bounds, alphas)
}

/// Increment `V_k` given the latent `u` and `n_k` allocations; the
/// conditional is `GIG(n_k − 1/2, 1 + 2u, α_k²)`.
fn update_increment<R: Rng + ?Sized>(v: f64, alpha: f64, count: usize, u: f64, rng: &mut R) -> f64 {
    let a = 1.0 + 2.0 * u;
    let b = alpha * alpha;
    if count == 0 {
        // GIG(−1/2, a, b) is inverse Gaussian with mean √(b/a), shape b
        return inverse_gaussian(alpha / a.sqrt(), b, rng).max(f64::MIN_POSITIVE);
    }
    let shape = count as f64 + 0.5;
    // log density of y = log v
    let target = |y: f64| shape * y - 0.5 * (a * y.exp() + b * (-y).exp());
    let mut y = v.ln();
    let mut ly = target(y);
    // independence proposal from the Gamma(n_k + 1/2, a/2) part, then a
    // random-walk step; both leave the conditional invariant
    let g: f64 = Gamma::new(shape, 2.0 / a).unwrap().sample(rng);
    if g > 0.0 {
        let yp = g.ln();
        let lp = target(yp);
        let q = |y: f64| shape * y - 0.5 * a * y.exp();
        if (lp - ly) - (q(yp) - q(y)) >= rng.random::<f64>().ln() {
            y = yp;
            ly = lp;
        }
    }
    let yp = y + rng.sample::<f64, _>(StandardNormal) / shape.sqrt();
    let lp = target(yp);
    if lp - ly >= rng.random::<f64>().ln() {
        y = yp;
    }
    y.exp().max(f64::MIN_POSITIVE)
}

#[allow(clippy::too_many_arguments)]
fn nig_sweep<R: Rng + ?Sized>(
    state: &mut State,
    incr: &mut [f64],
    data: &[f64],
    cfg: &FitConfig,
    base: &BaseMeasure,
    bounds: &[(f64, f64)],
    alphas: &[f64],
    rng: &mut R,
) {
    let k = incr.len();
    if cfg.likelihood {
        update_allocations(state, data, rng);
        let stats = cluster_stats(state, data, needs_members(base));
        let total: f64 = incr.iter().sum();
        let u: f64 = Gamma::new(data.len() as f64, 1.0 / total).unwrap().sample(rng);
        for j in 0..k {
            incr[j] = update_increment(incr[j], alphas[j], stats.counts[j], u, rng);
        }
        let empty: &[f64] = &[];
        for j in 0..k {
            let pts = stats.members.get(j).map(|v| v.as_slice()).unwrap_or(empty);
            state.atoms[j] = update_atom(
                state.atoms[j],
                base,
                bounds[j],
                stats.counts[j],
                stats.sums[j],
                pts,
                state.sigma,
                rng,
            );
        }
    } else {
        for j in 0..k {
            incr[j] = if alphas[j] > 0.0 {
                inverse_gaussian(alphas[j], alphas[j] * alphas[j], rng)
            } else {
                0.0
            };
            state.atoms[j] = base_restricted(base, bounds[j].0, bounds[j].1, rng);
        }
    }
    let total: f64 = neumaier_sum(incr.iter().copied());
    for (w, v) in state.weights.iter_mut().zip(incr.iter()) {
        *w = v / total;
    }
    state.sigma = update_sigma(state, data, cfg, rng);
}

fn initial_sigma(data: &[f64], cfg: &FitConfig) -> f64 {
    if let Some(s) = cfg.fixed_sigma {
        return s;
    }
    if data.len() < 2 {
        return 1.0;
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (0.5 * sd).max(1e-3)
}

/// Runs the chain and returns the retained draws (every `thin`-th sweep
/// after burn-in).
pub fn blocked_gibbs_fit<R: Rng + ?Sized>(data: &[f64], cfg: &FitConfig, rng: &mut R) -> Result<FitOutput> {
    cfg.validate()?;
    if cfg.likelihood && data.len() < 10 {
        return Err(Error::InvalidConfig(format!(
            "need at least 10 observations, got {}",
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("data contain non-finite values".into()));
    }
    let data: &[f64] = if cfg.likelihood { data } else { &[] };
    let base = *cfg.prior.base();
    let (size, cells) = match &cfg.prior {
        MixingPrior::PitmanYor(_) => (cfg.truncation, None),
        MixingPrior::NigPartition { cells, lo, hi, .. } => {
            (*cells, Some(nig_cells(&base, *cells, *lo, *hi)))
        }
    };
    let mut state = State {
        atoms: Vec::with_capacity(size),
        weights: vec![1.0 / size as f64; size],
        sticks: Vec::new(),
        sigma: initial_sigma(data, cfg),
        alloc: vec![0; data.len()],
    };
    let mut incr = Vec::new();
    match &cells {
        None => {
            state.atoms = (0..size).map(|_| base.sample(rng)).collect();
            state.sticks = vec![0.0; size];
        }
        Some((bounds, alphas)) => {
            state.atoms = bounds
                .iter()
                .map(|&(a, b)| base_restricted(&base, a, b, rng))
                .collect();
            incr = alphas.clone();
        }
    }

    let mut draws = Vec::with_capacity(cfg.retained());
    let mut trace = Vec::with_capacity(cfg.burn_in);
    for it in 0..cfg.iterations {
        match (&cfg.prior, &cells) {
            (MixingPrior::PitmanYor(p), _) => py_sweep(&mut state, data, cfg, p, rng),
            (MixingPrior::NigPartition { .. }, Some((bounds, alphas))) => {
                nig_sweep(&mut state, &mut incr, data, cfg, &base, bounds, alphas, rng)
            }
            _ => unreachable!(),
        }
        let keep = it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0;
        if it >= cfg.burn_in && !keep {
            continue;
        }
        let mixing = DiscreteMixingMeasure::new(state.atoms.clone(), state.weights.clone())?;
        let loglik = if cfg.likelihood {
            mixture_loglik(&mixing, state.sigma, data)
        } else {
            0.0
        };
        if it < cfg.burn_in {
            trace.push(loglik);
        } else {
            draws.push(PosteriorDraw {
                mixing,
                sigma: state.sigma,
                loglik,
                sticks: state.sticks.clone(),
                tail_mass: if state.sticks.is_empty() {
                    0.0
                } else {
                    *state.weights.last().unwrap()
                },
            });
        }
    }

    let mut warnings = Vec::new();
    if cfg.likelihood && trace.len() >= 4 {
        let running = |k: usize| trace[..k].iter().sum::<f64>() / k as f64;
        let (mid, end) = (running(trace.len() / 2), running(trace.len()));
        if end < mid {
            warnings.push(NonConvergenceWarning::LoglikDrift { mid, end });
        }
    }
    let max_tail = draws.iter().map(|d| d.tail_mass).fold(0.0, f64::max);
    if max_tail > cfg.remainder_tol {
        warnings.push(NonConvergenceWarning::TruncationRemainder {
            max_tail,
            tol: cfg.remainder_tol,
        });
    }
    Ok(FitOutput {
        draws,
        warnings,
        burn_in_trace: trace,
    })
}

/// Average of `F ∗ φ_σ` over the draws.
pub fn posterior_mean_density(draws: &[PosteriorDraw], grid: Grid) -> Result<GridFunction> {
    if draws.len() < MIN_DRAWS {
        return Err(Error::TooFewDraws {
            need: MIN_DRAWS,
            got: draws.len(),
        });
    }
    let mut acc = vec![0.0; grid.len()];
    for d in draws {
        let f = d.mixing.gaussian_mixture_direct(d.sigma, grid)?;
        for (a, v) in acc.iter_mut().zip(f.values()) {
            *a += v;
        }
    }
    let n = draws.len() as f64;
    GridFunction::from_values(grid, acc.into_iter().map(|v| v / n).collect())
}

/// Data-generating densities of the experiments, all of the form
/// `F₀ ∗ φ₁` with `F₀` finite.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    /// `φ₁`, i.e. `F₀ = δ₀`.
    StandardNormal,
    /// `F₀ = ½δ_{−1} + ½δ_{1}`.
    TwoPoint,
    Mixture(DiscreteMixingMeasure),
}

impl Truth {
    pub fn mixing(&self) -> DiscreteMixingMeasure {
        match self {
            Truth::StandardNormal => DiscreteMixingMeasure::dirac(0.0),
            Truth::TwoPoint => DiscreteMixingMeasure::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap(),
            Truth::Mixture(m) => m.clone(),
        }
    }

    pub fn density(&self, grid: Grid) -> Result<GridFunction> {
        self.mixing().gaussian_mixture_direct(1.0, grid)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let m = self.mixing();
        (0..n)
            .map(|_| {
                let theta = m.quantile(rng.random::<f64>());
                theta + rng.sample::<f64, _>(StandardNormal)
            })
            .collect()
    }
}

impl std::str::FromStr for Truth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" | "phi1" => Ok(Truth::StandardNormal),
            "two-point" => Ok(Truth::TwoPoint),
            other => Err(Error::InvalidConfig(format!("unknown truth `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionRow {
    pub n: usize,
    pub replicate: usize,
    pub l1: f64,
    pub l2: f64,
    pub sup: f64,
    /// Median over draws of `W₂(F, F₀)`.
    pub w2: f64,
    pub kl: f64,
}

/// Evaluation grid of the experiments.
pub fn experiment_grid() -> Grid {
    Grid::new(16.0, 2048).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Data and chain generators of replicate `r` at sample size `n`. The data
/// stream depends on the replicate only, so the samples along the ladder
/// are nested.
fn replicate_rngs(root: u64, r: usize, n: usize) -> (crate::rng::Rng, crate::rng::Rng) {
    let seed = replicate_seed(root, r as u64);
    (stream(seed, 0), stream(seed, 1 + n as u64))
}

/// One posterior fit per `(n, replicate)`, run in parallel; rows come back
/// ordered by `n` then replicate.
pub fn contraction_experiment(
    truth: &Truth,
    cfg: &FitConfig,
    ns: &[usize],
    replicates: usize,
) -> Result<Vec<ContractionRow>> {
    cfg.validate()?;
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n ladder must be increasing".into()));
    }
    let grid = experiment_grid();
    let f0 = truth.density(grid)?;
    let f0_mix = truth.mixing();
    let tasks: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    tasks
        .par_iter()
        .map(|&(n, r)| {
            let (mut data_rng, mut chain_rng) = replicate_rngs(cfg.seed, r, n);
            let data = truth.sample(n, &mut data_rng);
            let fit = blocked_gibbs_fit(&data, cfg, &mut chain_rng)?;
            let fhat = posterior_mean_density(&fit.draws, grid)?;
            let w2 = median(fit.draws.iter().map(|d| wasserstein(&d.mixing, &f0_mix, 2.0)).collect());
            Ok(ContractionRow {
                n,
                replicate: r,
                l1: fhat.lp_distance(&f0, 1.0)?,
                l2: fhat.lp_distance(&f0, 2.0)?,
                sup: fhat.sup_distance(&f0)?,
                w2,
                kl: kl_divergence(&f0, &fhat)?.value.max(0.0),
            })
        })
        .collect()
}

/// Median over replicates of a column at each `n`.
pub fn median_by_n(rows: &[ContractionRow], column: impl Fn(&ContractionRow) -> f64) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| (n, median(rows.iter().filter(|r| r.n == n).map(&column).collect())))
        .collect()
}

/// Least-squares slope of `log(median L¹)` on `log n`.
pub fn contraction_slope(rows: &[ContractionRow]) -> f64 {
    let pts: Vec<(f64, f64)> = median_by_n(rows, |r| r.l1)
        .into_iter()
        .map(|(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRow {
    pub n: usize,
    pub replicate: usize,
    pub w2_median: f64,
    pub w2_max: f64,
    /// `diam(Θ)` of the prior support.
    pub diameter: f64,
    /// Median over draws of `∥f_{F,1} − f₀∥₁`.
    pub l1_median: f64,
    /// Spearman correlation between the per-draw L¹ and W₂ errors.
    pub rank_corr: f64,
    /// Per-draw `(L¹, W₂)` errors.
    pub draws: Vec<(f64, f64)>,
}

/// Spearman correlation of the per-draw L¹ and W₂ errors pooled over every
/// row of a recovery experiment.
pub fn pooled_rank_correlation(rows: &[RecoveryRow]) -> f64 {
    let (l1, w2): (Vec<f64>, Vec<f64>) = rows.iter().flat_map(|r| r.draws.iter().copied()).unzip();
    spearman(&l1, &w2)
}

/// Ranks with ties averaged.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Posterior `W₂(F, F₀)` along an n ladder with the kernel scale held at 1.
/// The prior base must be truncated to a compact `Θ` containing the atoms
/// of `F₀`.
pub fn wasserstein_recovery_experiment(
    f0_mix: &DiscreteMixingMeasure,
    cfg: &FitConfig,
    ns: &[usize],
    replicates: usize,
) -> Result<Vec<RecoveryRow>> {
    if cfg.fixed_sigma != Some(1.0) {
        return Err(Error::InvalidConfig("the recovery experiment holds sigma at 1".into()));
    }
    let (lo, hi) = match cfg.prior.base().family {
        BaseFamily::Normal {
            truncate: Some(t), ..
        } => t,
        _ => {
            return Err(Error::InvalidConfig(
                "the recovery experiment needs a base truncated to a compact set".into(),
            ))
        }
    };
    if f0_mix.min_atom() < lo || f0_mix.max_atom() > hi {
        return Err(Error::InvalidConfig(format!("atoms of F0 lie outside [{lo}, {hi}]")));
    }
    cfg.validate()?;
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n ladder must be increasing".into()));
    }
    let truth = Truth::Mixture(f0_mix.clone());
    let grid = experiment_grid();
    let f0 = truth.density(grid)?;
    let tasks: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    tasks
        .par_iter()
        .map(|&(n, r)| {
            let (mut data_rng, mut chain_rng) = replicate_rngs(cfg.seed, r, n);
            let data = truth.sample(n, &mut data_rng);
            let fit = blocked_gibbs_fit(&data, cfg, &mut chain_rng)?;
            let mut w2 = Vec::with_capacity(fit.draws.len());
            let mut l1 = Vec::with_capacity(fit.draws.len());
            for d in &fit.draws {
                w2.push(wasserstein(&d.mixing, f0_mix, 2.0));
                l1.push(d.mixing.gaussian_mixture_direct(1.0, grid)?.lp_distance(&f0, 1.0)?);
            }
            Ok(RecoveryRow {
                n,
                replicate: r,
                w2_median: median(w2.clone()),
                w2_max: w2.iter().cloned().fold(0.0, f64::max),
                diameter: hi - lo,
                l1_median: median(l1.clone()),
                rank_corr: spearman(&l1, &w2),
                draws: l1.into_iter().zip(w2).collect(),
            })
        })
        .collect()
}
