//! The normalized inverse-Gaussian distribution on the simplex.
//!
//! With independent `V_j ~ IG(α_j, α_j²)` (mean `α_j`, shape `α_j²`), the
//! vector `V / ΣV` has density
//!
//! ```text
//! e^{Σα} Πα_j / (2^{N/2−1} π^{N/2}) · K_{N/2}(√A) A^{−N/4} · Π z_j^{−3/2},
//! A = Σ α_j² / z_j,
//! ```
//!
//! on the first `N − 1` coordinates.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::special::{ln_bessel_k, neumaier_sum};

#[derive(Debug, Clone, PartialEq)]
pub struct NIGParams {
    alphas: Vec<f64>,
}

impl NIGParams {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::InvalidParameter("N-IG needs at least two coordinates".into()));
        }
        if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) || !alphas.iter().any(|&a| a > 0.0) {
            return Err(Error::InvalidParameter(format!("N-IG parameters {alphas:?}")));
        }
        Ok(NIGParams { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `m = Σ α_j`.
    pub fn total(&self) -> f64 {
        neumaier_sum(self.alphas.iter().copied())
    }
}

/// Log density at a full simplex point `z` (all `N` coordinates).
pub fn nig_log_density(z: &[f64], params: &NIGParams) -> Result<f64> {
    let alphas = params.alphas();
    let n = alphas.len();
    if z.len() != n {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates, parameters {n}",
            z.len()
        )));
    }
    if z.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::BoundaryPoint);
    }
    if (neumaier_sum(z.iter().copied()) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("point does not sum to one".into()));
    }
    if alphas.iter().any(|&a| a == 0.0) {
        // the law sits on a face of the simplex
        return Ok(f64::NEG_INFINITY);
    }
    let nf = n as f64;
    let a_n = neumaier_sum(alphas.iter().zip(z).map(|(a, v)| a * a / v));
    let ln_consts = params.total() + neumaier_sum(alphas.iter().map(|a| a.ln()))
        - (0.5 * nf - 1.0) * std::f64::consts::LN_2
        - 0.5 * nf * std::f64::consts::PI.ln();
    // K_{−N/2} = K_{N/2}
    let ln_k = ln_bessel_k(0.5 * nf, a_n.sqrt());
    let ln_z = neumaier_sum(z.iter().map(|v| v.ln()));
    Ok(ln_consts + ln_k - 0.25 * nf * a_n.ln() - 1.5 * ln_z)
}

pub fn nig_density(z: &[f64], params: &NIGParams) -> Result<f64> {
    nig_log_density(z, params).map(f64::exp)
}

/// Inverse-Gaussian draw with the given mean and shape (Michael, Schucany
/// and Haas): transform a `χ²₁` variate to the smaller root, then pick
/// between the two roots with probability `μ/(μ+x)`.
pub fn inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    let y = n * n;
    let my = mean * y;
    // μ + μ/(2λ)(μy − √(4μλy + μ²y²)), rationalized against cancellation
    let root = (4.0 * mean * shape * y + my * my).sqrt();
    let x = mean - 2.0 * mean * my / (my + root);
    let x = if x > 0.0 { x } else { f64::MIN_POSITIVE };
    let u: f64 = rng.random();
    if u <= mean / (mean + x) {
        x
    } else {
        mean * mean / x
    }
}

/// The unnormalized increments `V_j ~ IG(α_j, α_j²)`; zero parameters give
/// zero increments.
pub fn nig_increments<R: Rng + ?Sized>(params: &NIGParams, rng: &mut R) -> Vec<f64> {
    params
        .alphas()
        .iter()
        .map(|&a| if a > 0.0 { inverse_gaussian(a, a * a, rng) } else { 0.0 })
        .collect()
}

pub fn nig_sample<R: Rng + ?Sized>(params: &NIGParams, rng: &mut R) -> Vec<f64> {
    let v = nig_increments(params, rng);
    let total = neumaier_sum(v.iter().copied());
    v.into_iter().map(|x| x / total).collect()
}

/// `P(Z_1 ≤ z)` for `N = 2` by composite Gauss–Legendre quadrature of the
/// density; the integrand vanishes faster than any power at the endpoints.
pub fn nig2_cdf(z: f64, params: &NIGParams) -> Result<f64> {
    if params.len() != 2 {
        return Err(Error::InvalidParameter("nig2_cdf needs N = 2".into()));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    if z >= 1.0 {
        return Ok(1.0);
    }
    let (nodes, weights) = crate::discretize::gauss_legendre(20)?;
    let panels = 64;
    let h = z / panels as f64;
    let mut terms = Vec::with_capacity(panels * nodes.len());
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (y, w) in nodes.iter().zip(&weights) {
            let x = mid + 0.5 * h * y;
            terms.push(0.5 * h * w * nig_density(&[x, 1.0 - x], params)?);
        }
    }
    Ok(neumaier_sum(terms).min(1.0))
}

/// Monte-Carlo integral of the density over the simplex, from uniform
/// points. Returns the estimate and its standard error.
pub fn nig_simplex_integral<R: Rng + ?Sized>(params: &NIGParams, points: usize, rng: &mut R) -> Result<(f64, f64)> {
    let n = params.len();
    if points < 2 {
        return Err(Error::InvalidParameter(format!("{points} simplex points")));
    }
    // volume of {z ∈ ℝ^{N−1}: z ≥ 0, Σz ≤ 1} is 1/(N−1)!
    let volume = 1.0 / (1..n).map(|k| k as f64).product::<f64>();
    let mut vals = Vec::with_capacity(points);
    let mut z = vec![0.0; n];
    while vals.len() < points {
        for v in z.iter_mut() {
            *v = rand_distr::Exp1.sample(rng);
        }
        let total: f64 = z.iter().sum();
        z.iter_mut().for_each(|v| *v /= total);
        match nig_density(&z, params) {
            Ok(d) => vals.push(volume * d),
            Err(Error::BoundaryPoint) => continue,
            Err(e) => return Err(e),
        }
    }
    let m = neumaier_sum(vals.iter().copied()) / points as f64;
    let var = neumaier_sum(vals.iter().map(|v| (v - m).powi(2))) / (points - 1) as f64;
    Ok((m, (var / points as f64).sqrt()))
}

/// `max_k |F̂(z_k) − F(z_k)|` over `z_k = k/m`, `0 < k < m`, between the
/// empirical CDF of the first coordinate of `draws` samples and
/// [`nig2_cdf`].
pub fn nig2_cdf_deviation<R: Rng + ?Sized>(
    params: &NIGParams,
    draws: usize,
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    if params.len() != 2 {
        return Err(Error::InvalidParameter("the CDF check needs N = 2".into()));
    }
    if draws == 0 || m < 2 {
        return Err(Error::InvalidParameter(format!("{draws} draws on {m} points")));
    }
    let mut first: Vec<f64> = (0..draws).map(|_| nig_sample(params, rng)[0]).collect();
    first.sort_by(f64::total_cmp);
    let mut worst = 0.0f64;
    for k in 1..m {
        let z = k as f64 / m as f64;
        let below = first.partition_point(|&x| x <= z) as f64 / draws as f64;
        worst = worst.max((below - nig2_cdf(z, params)?).abs());
    }
    Ok(worst)
}
