//! Moment-matched discretization of mixing measures.
//!
//! Matching the moments of `F` up to order `N` is done with a Gauss rule
//! for `F`: the recurrence coefficients of the polynomials orthogonal with
//! respect to `F` fill a symmetric tridiagonal (Jacobi) matrix whose
//! eigenvalues are the nodes and whose first eigenvector components give the
//! weights. An `n`-node rule matches moments `0..2n−1`, so
//! `n = ⌊N/2⌋ + 1` nodes suffice. All work is done in the scaled coordinate
//! `y = (θ − c)/h ∈ [−1, 1]` of the declared support.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gridfn::{Grid, GridFunction};
use crate::kernels::KernelSpec;
use crate::measure::DiscreteMixingMeasure;
use crate::metrics::{kl_divergence, second_log_moment};
use crate::special::neumaier_sum;
use crate::transforms::{default_delta, make_nonnegative, transform_analytic};

/// Moment-matrix condition number above which matching is refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Constant factor applied to every support budget.
pub const BUDGET_FACTOR: f64 = 4.0;

/// Source of moments for [`moment_match`].
#[derive(Debug, Clone, Copy)]
pub enum MomentInput<'a> {
    Measure(&'a DiscreteMixingMeasure),
    /// Raw moments `∫θ^j dF`, `j = 0, 1, ...`, about the origin.
    Moments(&'a [f64]),
}

/// Nodes and weights from a Jacobi matrix with diagonal `alpha` and squared
/// off-diagonal `beta` (`beta[k]` couples `k` and `k+1`).
fn golub_welsch(alpha: &[f64], beta: &[f64], mass: f64) -> (Vec<f64>, Vec<f64>) {
    let n = alpha.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = alpha[i];
        if i + 1 < n {
            let b = beta[i].max(0.0).sqrt();
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("quadrature order must be positive".into()));
    }
    let alpha = vec![0.0; n];
    let beta: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k * k / (4.0 * k * k - 1.0)
        })
        .collect();
    Ok(golub_welsch(&alpha, &beta, 2.0))
}

/// Orthonormal Legendre polynomials `p_0..p_{n−1}` at `y` with respect to
/// `dy/2` on `[−1, 1]`.
fn legendre_orthonormal(y: f64, n: usize, out: &mut [f64]) {
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    out[1] = 3f64.sqrt() * y;
    let mut p_prev = 1.0;
    let mut p = y;
    for k in 1..n - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * y * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
        out[k + 1] = (2.0 * (kf + 1.0) + 1.0).sqrt() * p;
    }
}

fn condition_number(m: DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v.abs());
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Stieltjes procedure on a discrete measure in scaled coordinates.
fn stieltjes(y: &[f64], w: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = y.len();
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut p_prev = vec![0.0; m];
    let mut p = vec![1.0; m];
    let mut norm_prev = 1.0;
    let mut norm = neumaier_sum(w.iter().copied());
    for k in 0..n {
        let a = neumaier_sum((0..m).map(|i| w[i] * y[i] * p[i] * p[i])) / norm;
        alpha.push(a);
        if k + 1 == n {
            break;
        }
        let b = if k == 0 { 0.0 } else { norm / norm_prev };
        let next: Vec<f64> = (0..m)
            .map(|i| (y[i] - a) * p[i] - b * p_prev[i])
            .collect();
        let next_norm = neumaier_sum((0..m).map(|i| w[i] * next[i] * next[i]));
        beta.push(next_norm / norm);
        // rescale to keep the recurrence in range
        let s = next_norm.sqrt();
        p_prev = p.iter().map(|v| v / s).collect();
        p = next.iter().map(|v| v / s).collect();
        norm_prev = norm / next_norm;
        norm = 1.0;
    }
    (alpha, beta)
}

fn check_support(support: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = support;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidSupport(format!("[{lo}, {hi}]")));
    }
    Ok((0.5 * (lo + hi), 0.5 * (hi - lo)))
}

/// Discrete measure on `support` with at most `N + 1` atoms matching the
/// moments of the input up to order `N` (in fact up to `2n − 1` with `n`
/// nodes).
pub fn moment_match(
    input: MomentInput<'_>,
    order: usize,
    support: (f64, f64),
) -> Result<DiscreteMixingMeasure> {
    let (c, h) = check_support(support)?;
    let n = order / 2 + 1;
    match input {
        MomentInput::Measure(f) => {
            let tol = 1e-12 * h;
            if f.min_atom() < support.0 - tol || f.max_atom() > support.1 + tol {
                return Err(Error::InvalidSupport(format!(
                    "atoms span [{}, {}] outside [{}, {}]",
                    f.min_atom(),
                    f.max_atom(),
                    support.0,
                    support.1
                )));
            }
            if f.len() <= n {
                return Ok(f.clone());
            }
            let y: Vec<f64> = f.atoms().iter().map(|a| (a - c) / h).collect();
            let w = f.weights();
            // Gram matrix of the orthonormal Legendre basis under F
            let mut gram = DMatrix::<f64>::zeros(n, n);
            let mut p = vec![0.0; n];
            for (yi, wi) in y.iter().zip(w) {
                legendre_orthonormal(*yi, n, &mut p);
                for a in 0..n {
                    for b in a..n {
                        gram[(a, b)] += wi * p[a] * p[b];
                    }
                }
            }
            for a in 0..n {
                for b in 0..a {
                    gram[(a, b)] = gram[(b, a)];
                }
            }
            let cond = condition_number(gram);
            if cond > CONDITION_LIMIT {
                return Err(Error::IllConditionedMoments(cond));
            }
            let (alpha, beta) = stieltjes(&y, w, n);
            let (nodes, weights) = golub_welsch(&alpha, &beta, 1.0);
            finish(nodes, weights, c, h)
        }
        MomentInput::Moments(raw) => {
            if raw.is_empty() {
                return Err(Error::InvalidParameter("empty moment vector".into()));
            }
            let n = n.min(raw.len() / 2).max(1);
            if 2 * n < order + 1 && raw.len() < order + 1 {
                return Err(Error::InvalidParameter(format!(
                    "{} moments cannot fix order {order}",
                    raw.len()
                )));
            }
            let mu = scaled_moments(raw, c, h, (2 * n).max(order + 1));
            let full_n = n;
            if n == 1 || mu.len() < 2 {
                return finish(vec![mu.get(1).copied().unwrap_or(0.0) / mu[0]], vec![mu[0]], c, h);
            }
            // Cholesky of the (n+1)×(n+1) Hankel matrix, rows 0..n−1 only
            let size = n + 1;
            let mut r = vec![vec![0.0; size]; size];
            let mut rank = n;
            'rows: for i in 0..n {
                let diag = mu[2 * i] - (0..i).map(|k| r[k][i] * r[k][i]).sum::<f64>();
                if diag <= 1e-14 * mu[0] {
                    rank = i;
                    break 'rows;
                }
                r[i][i] = diag.sqrt();
                for j in i + 1..size {
                    if i + j >= mu.len() {
                        continue;
                    }
                    let s = mu[i + j] - (0..i).map(|k| r[k][i] * r[k][j]).sum::<f64>();
                    r[i][j] = s / r[i][i];
                }
            }
            // a vanishing pivot means the moments come from a measure with
            // `rank` atoms; only the nondegenerate block has to be conditioned
            let n = rank.max(1);
            let cond = condition_number(DMatrix::from_fn(n, n, |i, j| mu[i + j]));
            if cond > CONDITION_LIMIT {
                return Err(Error::IllConditionedMoments(cond));
            }
            let mut alpha = Vec::with_capacity(n);
            let mut beta = Vec::with_capacity(n);
            for j in 0..n {
                let prev = if j == 0 { 0.0 } else { r[j - 1][j] / r[j - 1][j - 1] };
                alpha.push(r[j][j + 1] / r[j][j] - prev);
                if j + 1 < n {
                    beta.push((r[j + 1][j + 1] / r[j][j]).powi(2));
                }
            }
            let (nodes, weights) = golub_welsch(&alpha, &beta, mu[0]);
            if rank < full_n {
                // accept the smaller rule only if it still reproduces the input
                let top = (order + 1).min(mu.len());
                for (j, &target) in mu.iter().enumerate().take(top) {
                    let got = neumaier_sum(nodes.iter().zip(&weights).map(|(y, w)| w * y.powi(j as i32)));
                    if (got - target).abs() > 1e-8 * mu[0] {
                        let full = DMatrix::from_fn(full_n, full_n, |i, j| mu[i + j]);
                        return Err(Error::IllConditionedMoments(condition_number(full)));
                    }
                }
            }
            finish(nodes, weights, c, h)
        }
    }
}

/// Moments of `y = (θ − c)/h` from raw moments of `θ`, up to index `len−1`.
fn scaled_moments(raw: &[f64], c: f64, h: f64, len: usize) -> Vec<f64> {
    let len = len.min(raw.len());
    (0..len)
        .map(|k| {
            // E[(θ − c)^k] = Σ_i C(k,i) (−c)^{k−i} E[θ^i]
            let mut binom = 1.0;
            let mut terms = Vec::with_capacity(k + 1);
            for i in 0..=k {
                terms.push(binom * (-c).powi((k - i) as i32) * raw[i]);
                binom *= (k - i) as f64 / (i + 1) as f64;
            }
            neumaier_sum(terms) / h.powi(k as i32)
        })
        .collect()
}

fn finish(nodes: Vec<f64>, weights: Vec<f64>, c: f64, h: f64) -> Result<DiscreteMixingMeasure> {
    let atoms = nodes.iter().map(|y| c + h * y.clamp(-1.0, 1.0)).collect();
    DiscreteMixingMeasure::new(atoms, weights)
}

/// Which case of the support-point budget applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetRegime {
    BandLimited,
    SubUnit,
    Unit,
    SuperUnit,
    SuperUnitSmallSupport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBudget {
    pub epsilon: f64,
    pub a: f64,
    pub sigma: f64,
    pub r: f64,
    pub rho: f64,
    pub spectral_support: f64,
    pub regime: BudgetRegime,
    pub n: usize,
}

/// Number of support points needed to approximate any mixture `F ∗ K_σ`
/// with `F` on `[−a, a]` to within `ε/σ`, using the constants of the unit
/// scale kernel and the factor [`BUDGET_FACTOR`].
pub fn support_budget(epsilon: f64, a: f64, sigma: f64, kernel: &KernelSpec) -> Result<SupportBudget> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidSupport(format!("a = {a}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    let (rho, r, s_k) = kernel.with_scale(1.0).class_params();
    let log_inv = (1.0 / epsilon).ln();
    let ratio = a / (rho * sigma);
    let e_inv = (-1.0f64).exp();
    let (regime, raw) = if s_k.is_finite() {
        let e2 = std::f64::consts::E.powi(2);
        (BudgetRegime::BandLimited, log_inv.max(a * e2 * s_k / sigma))
    } else if r < 1.0 {
        // (ρσ/a)^{r/(1−r)} must dominate log(1/ε)
        if (1.0 / ratio).powf(r / (1.0 - r)) >= log_inv {
            (BudgetRegime::SubUnit, log_inv)
        } else {
            return Err(Error::RegimeUnavailable(format!(
                "r = {r}: (ρσ/a)^(r/(1-r)) = {:.3e} < log(1/ε) = {log_inv:.3e}",
                (1.0 / ratio).powf(r / (1.0 - r))
            )));
        }
    } else if r == 1.0 {
        if ratio <= e_inv {
            (BudgetRegime::Unit, log_inv)
        } else {
            return Err(Error::RegimeUnavailable(format!(
                "r = 1: a/(ρσ) = {ratio:.3e} exceeds 1/e"
            )));
        }
    } else if ratio >= e_inv {
        (
            BudgetRegime::SuperUnit,
            log_inv.max((a / sigma).powf(r / (r - 1.0))),
        )
    } else {
        (BudgetRegime::SuperUnitSmallSupport, log_inv)
    };
    Ok(SupportBudget {
        epsilon,
        a,
        sigma,
        r,
        rho,
        spectral_support: s_k,
        regime,
        n: (BUDGET_FACTOR * raw).ceil() as usize,
    })
}

/// Result of a partitioned discretization.
#[derive(Debug, Clone)]
pub struct Partitioned {
    pub measure: DiscreteMixingMeasure,
    pub cells: usize,
    pub order_per_cell: usize,
}

/// Equal-length cells on `[lo, hi]`, each moment matched to `order` and
/// weighted by its mass. Cells are processed in parallel.
pub fn discretize_cells(
    f: &DiscreteMixingMeasure,
    lo: f64,
    hi: f64,
    cells: usize,
    order: usize,
) -> Result<DiscreteMixingMeasure> {
    let width = (hi - lo) / cells as f64;
    let parts: Vec<Result<Option<(DiscreteMixingMeasure, f64)>>> = (0..cells)
        .into_par_iter()
        .map(|k| {
            let a = lo + k as f64 * width;
            let b = if k + 1 == cells { hi } else { a + width };
            // half-open cells, the last one closed
            let upper = if k + 1 == cells { b } else { b - f64::EPSILON * b.abs().max(1.0) };
            match f.restrict(a, upper) {
                None => Ok(None),
                Some((local, mass)) => {
                    let m = moment_match(MomentInput::Measure(&local), order, (a, b))?;
                    Ok(Some((m, mass)))
                }
            }
        })
        .collect();
    let mut kept = Vec::new();
    for p in parts {
        if let Some(x) = p? {
            kept.push(x);
        }
    }
    DiscreteMixingMeasure::combine(&kept)
}

/// Partition discretization for kernels with `r ≤ 1`.
///
/// `[−a, a]` is cut into `k` equal cells no longer than
/// `2ρσe^{−1}(log 1/ε)^{−(1−r)/r}`; on each cell `a_cell/(ρσ) ≤ e^{−1}`, so
/// `N_cell = ⌈4 log(1/ε)⌉` moments suffice for an `ε/σ` error per cell.
pub fn partition_discretize(
    f: &DiscreteMixingMeasure,
    epsilon: f64,
    a: f64,
    sigma: f64,
    kernel: &KernelSpec,
) -> Result<Partitioned> {
    let (rho, r, _) = kernel.with_scale(1.0).class_params();
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "partition discretization needs r <= 1, got {r}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    let log_inv = (1.0 / epsilon).ln();
    let max_len = 2.0 * rho * sigma * (-1.0f64).exp() * log_inv.powf(-(1.0 - r) / r);
    let cells = ((2.0 * a) / max_len).ceil().max(1.0) as usize;
    let order = (BUDGET_FACTOR * log_inv).ceil() as usize;
    let measure = discretize_cells(f, -a, a, cells, order)?;
    Ok(Partitioned {
        measure,
        cells,
        order_per_cell: order,
    })
}

/// Moment matching with automatic fallback: on an ill-conditioned moment
/// matrix the interval is halved repeatedly (2, 4, 8, ... cells), keeping the
/// order per cell.
pub fn discretize_with_fallback(
    f: &DiscreteMixingMeasure,
    order: usize,
    support: (f64, f64),
) -> Result<Partitioned> {
    let mut cells = 1;
    loop {
        let attempt = if cells == 1 {
            moment_match(MomentInput::Measure(f), order, support)
        } else {
            discretize_cells(f, support.0, support.1, cells, order)
        };
        match attempt {
            Ok(measure) => {
                return Ok(Partitioned {
                    measure,
                    cells,
                    order_per_cell: order,
                })
            }
            Err(Error::IllConditionedMoments(c)) => {
                if cells >= 1 << 16 {
                    return Err(Error::IllConditionedMoments(c));
                }
                cells *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Bound on `∥F ∗ φ_σ − F′ ∗ φ_σ∥_∞` when `F′` matches the moments of `F`
/// up to order `N` on a cell of half-width `a`:
/// `(2/π) σ^{−1} (a/σ)^N 2^{(N+1)/2} Γ((N+1)/2) / N!`.
pub fn gaussian_cell_error_bound(a: f64, sigma: f64, order: usize) -> f64 {
    let n = order as f64;
    let ln = (2.0 / std::f64::consts::PI).ln() - sigma.ln() + n * (a / sigma).ln()
        + 0.5 * (n + 1.0) * 2f64.ln()
        + ln_gamma(0.5 * (n + 1.0))
        - ln_gamma(n + 1.0);
    ln.exp()
}

/// Tail profile and tuning of [`finite_gaussian_mixture`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgmConfig {
    /// `c₀` in `f₀(x) ≤ M₀ e^{−c₀|x|^ϖ}`.
    pub c0: f64,
    /// Tail exponent `ϖ`.
    pub varpi: f64,
    /// Supersmoothness exponent `r₀` of `f₀`.
    pub r0: f64,
    pub delta: f64,
    /// Floor `D_σ = σ^{−(R−1)} e^{−c̃ (1/σ)^{r₀}}`.
    pub floor_r: f64,
    pub floor_c: f64,
    /// Target per-cell discretization bound.
    pub cell_tol: f64,
}

impl Default for FgmConfig {
    /// Standard normal truth: `c₀ = 1/2`, `ϖ = r₀ = 2`; `R = 2`, `c̃ = 1`.
    fn default() -> Self {
        FgmConfig {
            c0: 0.5,
            varpi: 2.0,
            r0: 2.0,
            delta: default_delta(),
            floor_r: 2.0,
            floor_c: 1.0,
            cell_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FgmDiagnostics {
    pub a_sigma: f64,
    pub atoms: usize,
    pub cells: usize,
    pub order_per_cell: usize,
    /// Mass of `h_σ` on `[−a_σ, a_σ]`.
    pub restricted_mass: f64,
    pub floor_weight: f64,
    pub transform_sup_error: f64,
    pub discretization_sup_error: f64,
    pub kl: f64,
    pub second_log_moment: f64,
    /// `m_σ` on the grid.
    pub density: GridFunction,
}

/// Finite Gaussian mixture `m_σ` approximating an analytic `f₀`.
///
/// Pipeline: `T_σ(f₀)` → floor at `δ f₀` → normalize to `h_σ` → restrict
/// to `[−a_σ, a_σ]` → cellwise moment matching → add `D_σ φ_σ` and
/// renormalize.
pub fn finite_gaussian_mixture(
    f0: &GridFunction,
    sigma: f64,
    cfg: &FgmConfig,
) -> Result<(DiscreteMixingMeasure, FgmDiagnostics)> {
    let grid: Grid = *f0.grid();
    let t = transform_analytic(f0, sigma, None)?;
    let phi = KernelSpec::gaussian(sigma);
    let smooth = |g: &GridFunction| g.apply_real_multiplier(|t| phi.fourier(t).unwrap());
    let transform_sup_error = smooth(&t.t_sigma).sup_distance(f0)?;
    let nn = make_nonnegative(&t, f0, cfg.delta)?;
    let a_sigma = (2.0 / cfg.c0 * (1.0 / sigma).powf(cfg.r0))
        .powf(1.0 / cfg.varpi.min(2.0))
        .ceil();
    let (restricted, mass) = DiscreteMixingMeasure::from_grid_restricted(&nn.h, -a_sigma, a_sigma)?;

    // cells of half-width σ/2, order from the explicit Gaussian bound
    let half = 0.5 * sigma;
    let cells = (a_sigma / half).ceil() as usize;
    let cell_half = a_sigma / cells as f64;
    let mut n_nodes = 1;
    while gaussian_cell_error_bound(cell_half, sigma, 2 * n_nodes - 1) > cfg.cell_tol && n_nodes < 40 {
        n_nodes += 1;
    }
    let order = 2 * n_nodes - 2;
    let discrete = discretize_cells(&restricted, -a_sigma, a_sigma, cells, order)?;

    let exact = restricted.mixture_density(&phi, grid)?;
    let approx = discrete.mixture_density(&phi, grid)?;
    let discretization_sup_error = exact.sup_distance(&approx)?;

    let floor_weight =
        sigma.powf(-(cfg.floor_r - 1.0)) * (-cfg.floor_c * (1.0 / sigma).powf(cfg.r0)).exp();
    let total = mass + floor_weight;
    let density = discrete
        .gaussian_mixture_direct(sigma, grid)?
        .scale(mass)
        .add(&DiscreteMixingMeasure::dirac(0.0).gaussian_mixture_direct(sigma, grid)?.scale(floor_weight))?
        .scale(1.0 / total);
    let kl = kl_divergence(f0, &density)?;
    let slm = second_log_moment(f0, &density)?;
    let measure = DiscreteMixingMeasure::combine(&[
        (discrete.clone(), mass / total),
        (DiscreteMixingMeasure::dirac(0.0), floor_weight / total),
    ])?;
    let diagnostics = FgmDiagnostics {
        a_sigma,
        atoms: discrete.len(),
        cells,
        order_per_cell: order,
        restricted_mass: mass,
        floor_weight,
        transform_sup_error,
        discretization_sup_error,
        kl: kl.value,
        second_log_moment: slm,
        density,
    };
    Ok((measure, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Family;

    #[test]
    fn gauss_legendre_two_points() {
        let (x, w) = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirac_is_fixed() {
        let d = DiscreteMixingMeasure::dirac(0.0);
        for n in [1, 3, 8] {
            let m = moment_match(MomentInput::Measure(&d), n, (-1.0, 1.0)).unwrap();
            assert_eq!(m, d);
        }
        let m = moment_match(MomentInput::Moments(&[1.0, 0.0, 0.0, 0.0]), 3, (-1.0, 1.0)).unwrap();
        assert_eq!(m.atoms(), &[0.0]);
    }

    #[test]
    fn two_point_fixed() {
        let f = DiscreteMixingMeasure::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let m = moment_match(MomentInput::Measure(&f), 3, (-1.0, 1.0)).unwrap();
        assert_eq!(m, f);
        let m = moment_match(MomentInput::Moments(&[1.0, 0.0, 1.0, 0.0]), 3, (-1.0, 1.0)).unwrap();
        assert!((m.atoms()[0] + 1.0).abs() < 1e-12 && (m.atoms()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_from_raw_moments() {
        let mu = [1.0, 0.0, 1.0 / 3.0, 0.0];
        let m = moment_match(MomentInput::Moments(&mu), 3, (-1.0, 1.0)).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((m.atoms()[0] + r).abs() < 1e-12 && (m.atoms()[1] - r).abs() < 1e-12);
        assert!((m.weights()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn off_center_support_moments() {
        // Beta-like density on [1, 4]
        let f = DiscreteMixingMeasure::from_density(|x| (x - 1.0) * (4.0 - x).powi(2), 1.0, 4.0, 60).unwrap();
        for order in [2usize, 5, 8, 12] {
            let m = moment_match(MomentInput::Measure(&f), order, (1.0, 4.0)).unwrap();
            assert!(m.len() <= order + 1);
            for j in 0..=order as u32 {
                let a = f.moment(j, 0.0);
                let b = m.moment(j, 0.0);
                assert!((a - b).abs() <= 1e-8 * a.abs(), "order {order} j {j}");
            }
        }
    }

    #[test]
    fn raw_moments_ill_conditioned() {
        // uniform on [0, 1] moments 1/(j+1) read on a much wider support
        let mu: Vec<f64> = (0..60).map(|j| 1.0 / (j as f64 + 1.0)).collect();
        assert!(matches!(
            moment_match(MomentInput::Moments(&mu), 58, (0.0, 1.0)),
            Err(Error::IllConditionedMoments(_))
        ));
    }

    #[test]
    fn rejects_atoms_outside_support() {
        let f = DiscreteMixingMeasure::new(vec![-2.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            moment_match(MomentInput::Measure(&f), 3, (-1.0, 1.0)),
            Err(Error::InvalidSupport(_))
        ));
        assert!(moment_match(MomentInput::Measure(&f), 3, (1.0, -1.0)).is_err());
    }

    #[test]
    fn budgets() {
        let fvp = KernelSpec::new(Family::Fvp, 1.0).unwrap();
        let b = support_budget(1e-3, 2.0, 0.5, &fvp).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        let expect = (4.0 * (1e3f64.ln()).max(2.0 * e2 / 0.5)).ceil() as usize;
        assert_eq!(b.n, expect);
        assert_eq!(b.regime, BudgetRegime::BandLimited);

        let g = KernelSpec::gaussian(1.0);
        let b = support_budget(1e-4, 2.0, 0.5, &g).unwrap();
        assert_eq!(b.n, (4.0 * (1e4f64.ln()).max(16.0)).ceil() as usize);
        assert_eq!(b.regime, BudgetRegime::SuperUnit);

        let cauchy = KernelSpec::new(Family::Cauchy, 1.0).unwrap();
        assert!(matches!(
            support_budget(1e-3, 3.0, 0.5, &cauchy),
            Err(Error::RegimeUnavailable(_))
        ));
        assert_eq!(
            support_budget(1e-3, 0.1, 0.5, &cauchy).unwrap().regime,
            BudgetRegime::Unit
        );
    }

    #[test]
    fn single_cell_partition_equals_moment_match() {
        let cauchy = KernelSpec::new(Family::Cauchy, 1.0).unwrap();
        let f = DiscreteMixingMeasure::from_density(|_| 1.0, -0.05, 0.05, 40).unwrap();
        let p = partition_discretize(&f, 1e-3, 0.05, 0.5, &cauchy).unwrap();
        assert_eq!(p.cells, 1);
        let direct = moment_match(MomentInput::Measure(&f), p.order_per_cell, (-0.05, 0.05)).unwrap();
        assert_eq!(p.measure, direct);
    }

    #[test]
    fn cell_bound_decreases() {
        let mut prev = f64::INFINITY;
        for n in 1..30 {
            let b = gaussian_cell_error_bound(0.125, 0.25, n);
            assert!(b < prev);
            prev = b;
        }
    }
}
