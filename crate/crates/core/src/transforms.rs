//! Corrected-density transforms.
//!
//! `T_σ(f₀) = f₀ − Σ_j d_j σ^j (f₀^{(j)} ∗ sinc_σ)` is evaluated spectrally:
//! sinc-convolution is the band indicator on `|t| ≤ 1/σ` and the `j`-th
//! derivative is the multiplier `(−it)^j`, so in band the sum becomes the
//! power series `1 − Σ d_j (−iσt)^j` and out of band the multiplier is 1.

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::kernels::{Family, KernelSpec};
use crate::special::neumaier_sum;

/// Largest truncation order accepted by the automatic order choice.
pub const MAX_ORDER: usize = 120;

/// Default floor factor `δ = 1 − √e/2`.
pub fn default_delta() -> f64 {
    1.0 - std::f64::consts::E.sqrt() / 2.0
}

/// Standard normal moments `m_j` and the derived sequences `c_j`, `d_j`,
/// indexed from 0 (index 0 unused for `c`, `d`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCoefficients {
    pub max_order: usize,
    pub m: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// `m_j / j!`, which is `1 / (2^{j/2} (j/2)!)` for even `j` and 0 otherwise.
fn scaled_moment(j: usize) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    let k = j / 2;
    let mut v = 1.0;
    for i in 1..=k {
        v /= 2.0 * i as f64;
    }
    v
}

/// Coefficients up to order `J`.
pub fn coefficients(max_order: usize) -> TransformCoefficients {
    let j_max = max_order.max(2);
    let mut m = vec![0.0; j_max + 1];
    m[0] = 1.0;
    for j in (2..=j_max).step_by(2) {
        // (j−1)!!
        m[j] = m[j - 2] * (j - 1) as f64;
    }
    let e: Vec<f64> = (0..=j_max).map(scaled_moment).collect();
    let mut c = vec![0.0; j_max + 1];
    let mut d = vec![0.0; j_max + 1];
    d[2] = e[2];
    for j in 3..=j_max {
        c[j] = -neumaier_sum((1..j).map(|k| e[k] * e[j - k]));
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        d[j] = sign * e[j] + c[j];
    }
    TransformCoefficients {
        max_order: j_max,
        m,
        c,
        d,
    }
}

impl TransformCoefficients {
    /// In-band multiplier `1 − Σ_{j≤J} d_j (−iw)^j` at `w = σt`. Only even
    /// orders contribute, so the value is real.
    pub fn multiplier(&self, w: f64) -> f64 {
        1.0 - self.series(w, self.max_order)
    }

    /// `Σ_{j ≤ order} d_j (−iw)^j` (real since odd `d_j` vanish).
    fn series(&self, w: f64, order: usize) -> f64 {
        // (−iw)^{2k} = (−w²)^k
        let q = -w * w;
        let mut pow = 1.0;
        let mut terms = Vec::with_capacity(order / 2);
        for j in (2..=order.min(self.max_order)).step_by(2) {
            pow *= q;
            terms.push(self.d[j] * pow);
        }
        neumaier_sum(terms)
    }

    /// `Σ_{1≤j≤J} |d_j|`.
    pub fn abs_sum(&self) -> f64 {
        neumaier_sum(self.d.iter().map(|v| v.abs()))
    }
}

/// `3 − 3e^{−u} + e^{−2u}`.
pub fn closed_form_symbol(u: f64) -> f64 {
    let v = (-u).exp();
    3.0 - 3.0 * v + v * v
}

/// Maximum over `u ∈ [0, u_max]` of the gap between the truncated series
/// multiplier and `3 − 3e^{−u} + e^{−2u}`, with `u = σ²t²/2`.
pub fn spectral_symbol_check(max_order: usize, u_max: f64) -> f64 {
    let coef = coefficients(max_order);
    let n = 2000;
    (0..=n)
        .map(|i| {
            let u = u_max * i as f64 / n as f64;
            let w = (2.0 * u).sqrt();
            (coef.multiplier(w) - closed_form_symbol(u)).abs()
        })
        .fold(0.0, f64::max)
}

/// Smallest even order whose last in-band term `|d_J|` is below `1e-14`.
pub fn auto_order() -> usize {
    let coef = coefficients(MAX_ORDER);
    (2..=MAX_ORDER)
        .step_by(2)
        .find(|&j| coef.d[j].abs() <= 1e-14)
        .unwrap_or(MAX_ORDER)
}

#[derive(Debug, Clone)]
pub struct TransformResult {
    pub t_sigma: GridFunction,
    pub sigma: f64,
    pub truncation_order: usize,
    /// `|∫ T_σ(f₀) − 1|`.
    pub mass_defect: f64,
}

fn check_band(f0: &GridFunction, sigma: f64) -> Result<()> {
    let nyquist = f0.grid().nyquist();
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if 1.0 / sigma > nyquist {
        return Err(Error::CutoffAboveNyquist {
            cutoff: 1.0 / sigma,
            nyquist,
        });
    }
    Ok(())
}

/// `T_σ(f₀)` with the series truncated at order `J` (`None` picks the
/// smallest converged even order).
pub fn transform_analytic(
    f0: &GridFunction,
    sigma: f64,
    max_order: Option<usize>,
) -> Result<TransformResult> {
    check_band(f0, sigma)?;
    let order = max_order.unwrap_or_else(auto_order);
    let coef = coefficients(order.max(2));
    // the band edge is w = σt = 1, where the j-th term is |d_j|
    let last_even = order - order % 2;
    if last_even < 2 || coef.d[last_even].abs() > 1e-14 {
        return Err(Error::SeriesNotConverged {
            order,
            term: if last_even < 2 { 1.0 } else { coef.d[last_even].abs() },
        });
    }
    let cutoff = 1.0 / sigma;
    let t_sigma = f0.apply_real_multiplier(|t| {
        if t.abs() <= cutoff {
            coef.multiplier(sigma * t)
        } else {
            1.0
        }
    });
    let mass_defect = (t_sigma.integral() - 1.0).abs();
    Ok(TransformResult {
        t_sigma,
        sigma,
        truncation_order: order,
        mass_defect,
    })
}

/// Smoothing kernel used by the finite-order transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoother {
    Sinc,
    /// Trapezoidal superkernel with the given flat part and cutoff.
    Superkernel { flat: f64, cutoff: f64 },
}

/// `T_{k₀,σ}(f₀) = f₀ − Σ_{j<k₀} d_j σ^j (f₀^{(j)} ∗ S_σ)`.
pub fn transform_sobolev(
    f0: &GridFunction,
    sigma: f64,
    k0: usize,
    smoother: Smoother,
) -> Result<TransformResult> {
    if k0 < 1 {
        return Err(Error::InvalidParameter("k0 must be at least 1".into()));
    }
    check_band(f0, sigma)?;
    let kernel = match smoother {
        Smoother::Sinc => KernelSpec::new(Family::Sinc, sigma)?,
        Smoother::Superkernel { flat, cutoff } => {
            let k = KernelSpec::new(Family::Superkernel { flat, cutoff }, sigma)?;
            let nyquist = f0.grid().nyquist();
            if cutoff / sigma > nyquist {
                return Err(Error::CutoffAboveNyquist {
                    cutoff: cutoff / sigma,
                    nyquist,
                });
            }
            k
        }
    };
    let order = k0 - 1;
    let coef = coefficients(order.max(2));
    let t_sigma = f0.apply_real_multiplier(|t| {
        1.0 - kernel.fourier(t).unwrap() * coef.series(sigma * t, order)
    });
    let mass_defect = (t_sigma.integral() - 1.0).abs();
    Ok(TransformResult {
        t_sigma,
        sigma,
        truncation_order: order,
        mass_defect,
    })
}

/// `∥T ∗ φ_σ − f₀∥_∞` for a transform result.
pub fn smoothed_sup_error(result: &TransformResult, f0: &GridFunction) -> Result<f64> {
    let s = result.sigma;
    result
        .t_sigma
        .apply_real_multiplier(|t| (-0.5 * s * s * t * t).exp())
        .sup_distance(f0)
}

/// Output of [`make_nonnegative`].
#[derive(Debug, Clone)]
pub struct NonNegative {
    /// `g_σ = T_σ(f₀) 1_G + δ f₀ 1_{G^c}`, `G = {T_σ(f₀) > δ f₀}`.
    pub g: GridFunction,
    /// `h_σ = g_σ / ∫ g_σ`.
    pub h: GridFunction,
    pub mass: f64,
    /// Grid points outside `G`.
    pub replaced: usize,
}

pub fn make_nonnegative(t: &TransformResult, f0: &GridFunction, delta: f64) -> Result<NonNegative> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::NegativeDelta(delta));
    }
    let mut replaced = 0;
    let values: Vec<f64> = t
        .t_sigma
        .values()
        .iter()
        .zip(f0.values())
        .map(|(&tv, &fv)| {
            let floor = delta * fv;
            if tv > floor {
                tv
            } else {
                replaced += 1;
                floor
            }
        })
        .collect();
    let g = GridFunction::from_values(*f0.grid(), values)?;
    let mass = g.integral();
    let h = g.scale(1.0 / mass);
    Ok(NonNegative {
        g,
        h,
        mass,
        replaced,
    })
}

/// `3f₀ − 3(f₀∗φ_σ) + f₀∗φ_σ∗φ_σ`, assembled by convolution.
pub fn three_term_identity(f0: &GridFunction, sigma: f64) -> Result<GridFunction> {
    let phi = KernelSpec::gaussian(sigma).grid(*f0.grid())?;
    let once = f0.convolve_unchecked(&phi);
    let twice = once.convolve_unchecked(&phi);
    f0.scale(3.0).sub(&once.scale(3.0))?.add(&twice)
}
