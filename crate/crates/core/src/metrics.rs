//! Distances between densities and between mixing measures.

use crate::error::{Error, Result};
use crate::gridfn::{Grid, GridFunction};
use crate::kernels::{convolution_floor_scale, KernelSpec};
use crate::measure::DiscreteMixingMeasure;
use crate::special::neumaier_sum;

/// Densities below this are treated as zero in log-ratio quadrature.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// `W_p(F₁, F₂) = (∫₀¹ |Q₁(u) − Q₂(u)|^p du)^{1/p}`.
///
/// Both quantile functions are step functions, so the integral is a finite
/// sum over the merged breakpoints of the two distribution functions.
pub fn wasserstein(f1: &DiscreteMixingMeasure, f2: &DiscreteMixingMeasure, p: f64) -> f64 {
    assert!(p >= 1.0, "wasserstein needs p >= 1, got {p}");
    let (a1, w1) = (f1.atoms(), f1.weights());
    let (a2, w2) = (f2.atoms(), f2.weights());
    let (mut i, mut j) = (0, 0);
    let (mut r1, mut r2) = (w1[0], w2[0]);
    let mut terms = Vec::with_capacity(a1.len() + a2.len());
    loop {
        let step = r1.min(r2);
        terms.push(step * (a1[i] - a2[j]).abs().powf(p));
        r1 -= step;
        r2 -= step;
        // advance whichever block ran out; tiny residues from rounding count as empty
        let done1 = r1 <= 1e-15;
        let done2 = r2 <= 1e-15;
        if done1 {
            i += 1;
        }
        if done2 {
            j += 1;
        }
        if i >= a1.len() || j >= a2.len() {
            break;
        }
        if done1 {
            r1 = w1[i];
        }
        if done2 {
            r2 = w2[j];
        }
    }
    neumaier_sum(terms).max(0.0).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub value: f64,
    /// `f₀`-mass of the points where `f` had to be floored.
    pub floored_mass: f64,
}

fn log_ratios(f0: &GridFunction, f: &GridFunction) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if f0.grid() != f.grid() {
        let (a, b) = (f0.grid(), f.grid());
        return Err(Error::GridMismatch(a.half_width(), a.len(), b.half_width(), b.len()));
    }
    let dx = f0.grid().spacing();
    let tol = 1e-12 * f.sup_norm();
    let mut weights = Vec::new();
    let mut logs = Vec::new();
    let mut floored = Vec::new();
    let mut violations = 0;
    for (&p, &q) in f0.values().iter().zip(f.values()) {
        if !(p > DENSITY_FLOOR) {
            continue;
        }
        if !q.is_finite() || q < -tol {
            violations += 1;
            continue;
        }
        let q = if q < DENSITY_FLOOR {
            floored.push(p * dx);
            DENSITY_FLOOR
        } else {
            q
        };
        weights.push(p * dx);
        logs.push((p / q).ln());
    }
    if violations > 0 {
        return Err(Error::SupportViolation(violations));
    }
    Ok((weights, logs, neumaier_sum(floored)))
}

/// `KL(f₀; f) = ∫ f₀ log(f₀/f)` by grid quadrature, `f` floored at
/// [`DENSITY_FLOOR`].
pub fn kl_divergence(f0: &GridFunction, f: &GridFunction) -> Result<Divergence> {
    let (w, l, floored_mass) = log_ratios(f0, f)?;
    let value = neumaier_sum(w.iter().zip(&l).map(|(w, l)| w * l)).max(0.0);
    Ok(Divergence { value, floored_mass })
}

/// `E₀[(log(f₀/f))²]`.
pub fn second_log_moment(f0: &GridFunction, f: &GridFunction) -> Result<f64> {
    let (w, l, _) = log_ratios(f0, f)?;
    Ok(neumaier_sum(w.iter().zip(&l).map(|(w, l)| w * l * l)))
}

/// Hellinger distance `(∫(√f − √g)²)^{1/2}`; negative round-off is clipped.
pub fn hellinger(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let d = f.zip_with(g, |a, b| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2))?;
    Ok(d.integral().max(0.0).sqrt())
}

/// Parameters of [`interpolation_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationParams {
    /// Exponent `υ ∈ (0, 1]` of the L¹-to-sup bound.
    pub upsilon: f64,
    /// Moment order `u > 0`.
    pub u: f64,
    /// `p ∈ [1, 2)`.
    pub p: f64,
    /// Hölder exponent `t` with `pt > 1`.
    pub t: f64,
}

impl Default for InterpolationParams {
    fn default() -> Self {
        InterpolationParams {
            upsilon: 0.5,
            u: 0.5,
            p: 1.5,
            t: 2.0,
        }
    }
}

/// Each inequality as lhs ≤ rhs; the margin is `rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin() >= -tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    /// `∥f−g∥_p^p` against the minimized Hölder/moment split.
    pub holder: Inequality,
    /// The same with the prefactor `s^{−1/s}` in place of `s^{1/s}`. This
    /// variant is smaller than the true minimum and is reported, not checked.
    pub holder_literal: Inequality,
    /// `∥f−g∥₁ ≤ 2∥f−g∥_∞^{1−υ} ∫f^υ`.
    pub l1_to_sup: Inequality,
    /// `∥f−g∥_p ≤ max{∥f−g∥₁, ∥f−g∥₂}`.
    pub p_norm_max: Inequality,
}

impl InterpolationReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.holder.holds(tol) && self.l1_to_sup.holds(tol) && self.p_norm_max.holds(tol)
    }
}

/// Evaluates the three interpolation inequalities for densities `f`, `g`
/// by grid quadrature.
pub fn interpolation_checks(
    f: &GridFunction,
    g: &GridFunction,
    params: &InterpolationParams,
) -> Result<InterpolationReport> {
    let InterpolationParams { upsilon, u, p, t } = *params;
    if !(1.0..2.0).contains(&p) || !(p * t > 1.0) || !(t > 1.0) || !(u > 0.0) {
        return Err(Error::InvalidParameter(format!("p = {p}, t = {t}, u = {u}")));
    }
    if !(upsilon > 0.0 && upsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("upsilon = {upsilon}")));
    }
    let diff = f.sub(g)?;
    let sup = diff.sup_norm();
    let lp = diff.lp_norm(p)?;
    let lpt = diff.lp_norm(p * t)?;
    let l1 = diff.lp_norm(1.0)?;
    let l2 = diff.lp_norm(2.0)?;
    let abs_moment = |h: &GridFunction| {
        h.grid()
            .points()
            .zip(h.values())
            .map(|(x, v)| x.abs().powf(u) * v.max(0.0))
            .sum::<f64>()
            * h.grid().spacing()
    };
    let moments = abs_moment(f) + abs_moment(g);

    let s = 1.0 / (1.0 - 1.0 / t);
    let core = (2f64.powf(1.0 / s) / u).powf(u)
        * lpt.powf(p * u)
        * sup.powf((p - 1.0) / s)
        * moments.powf(1.0 / s);
    let bound = |prefactor: f64| (1.0 / s + u) * (prefactor * core).powf(s / (1.0 + s * u));
    let lhs = lp.powf(p);
    let holder = Inequality {
        lhs,
        rhs: bound(s.powf(1.0 / s)),
    };
    let holder_literal = Inequality {
        lhs,
        rhs: bound(s.powf(-1.0 / s)),
    };

    let f_ups = f.map(|v| v.max(0.0).powf(upsilon)).integral();
    let l1_to_sup = Inequality {
        lhs: l1,
        rhs: 2.0 * sup.powf(1.0 - upsilon) * f_ups,
    };
    let p_norm_max = Inequality {
        lhs: lp,
        rhs: l1.max(l2),
    };
    Ok(InterpolationReport {
        holder,
        holder_literal,
        l1_to_sup,
        p_norm_max,
    })
}

/// `∥K_σ(·−θ_j) − K_σ(·−θ_k)∥₁ ≤ 2∥K∥_∞ |θ_j − θ_k| / σ`, with `∥K∥_∞`
/// taken at unit scale.
pub fn translation_l1_check(kernel: &KernelSpec, theta_j: f64, theta_k: f64, grid: Grid) -> Result<Inequality> {
    let k = kernel.grid(grid)?;
    let lhs = k.translate(theta_j).lp_distance(&k.translate(theta_k), 1.0)?;
    let rhs = 2.0 * kernel.with_scale(1.0).sup_norm() * (theta_j - theta_k).abs() / kernel.scale;
    Ok(Inequality { lhs, rhs })
}

/// The chain `∥F∗K_σ − F∗K_σ'∥₁ ≤ ∥K_σ − K_σ'∥₁ ≤ 2|σ−σ'|/(σ∧σ')` for a
/// symmetric kernel decreasing in `|x|`.
pub fn scale_l1_check(
    f: &DiscreteMixingMeasure,
    kernel: &KernelSpec,
    sigma: f64,
    sigma_prime: f64,
    grid: Grid,
) -> Result<(Inequality, Inequality)> {
    if !kernel.is_monotone() {
        return Err(Error::InvalidParameter(format!(
            "{kernel} is not monotone in |x|"
        )));
    }
    if !(sigma > 0.0 && sigma_prime > 0.0) {
        return Err(Error::NonPositiveSigma(sigma.min(sigma_prime)));
    }
    let k1 = kernel.with_scale(sigma);
    let k2 = kernel.with_scale(sigma_prime);
    let mixtures = f.mixture_density(&k1, grid)?.lp_distance(&f.mixture_density(&k2, grid)?, 1.0)?;
    let kernels = k1.grid(grid)?.lp_distance(&k2.grid(grid)?, 1.0)?;
    let ratio = 2.0 * (sigma - sigma_prime).abs() / sigma.min(sigma_prime);
    Ok((
        Inequality {
            lhs: mixtures,
            rhs: kernels,
        },
        Inequality {
            lhs: kernels,
            rhs: ratio,
        },
    ))
}

/// `f ∗ K_σ ≥ C_ζ f` with `C_ζ = ζℓ/∥f∥_∞` for `σ < τ_ζ`, where `f` is
/// nondecreasing left of `a`, nonincreasing right of `b` and at least `ℓ`
/// on `[a, b]`. Returns the pointwise comparison at the worst grid point.
pub fn lower_bound_check(
    f: &GridFunction,
    a: f64,
    b: f64,
    kernel: &KernelSpec,
    zeta: f64,
) -> Result<Inequality> {
    let tau = convolution_floor_scale(kernel, b - a, zeta)?;
    if !(kernel.scale < tau) {
        return Err(Error::PreconditionViolated(format!(
            "scale {} is not below tau = {tau}",
            kernel.scale
        )));
    }
    let grid = *f.grid();
    let ell = grid
        .points()
        .zip(f.values())
        .filter(|(x, _)| *x >= a && *x <= b)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    if !(ell > 0.0) {
        return Err(Error::PreconditionViolated("f must be positive on [a, b]".into()));
    }
    let c = zeta * ell / f.sup_norm();
    let smooth = f.convolve_unchecked(&kernel.grid(grid)?);
    let mut worst = Inequality { lhs: 0.0, rhs: 0.0 };
    let mut margin = f64::INFINITY;
    for (&fv, &sv) in f.values().iter().zip(smooth.values()) {
        let m = sv - c * fv;
        if m < margin {
            margin = m;
            worst = Inequality { lhs: c * fv, rhs: sv };
        }
    }
    Ok(worst)
}
