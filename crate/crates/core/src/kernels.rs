//! Supersmooth kernel catalog.
//!
//! Every family is addressed at unit scale and rescaled as
//! `K_σ(x) = σ^{-1} K(x/σ)`, so `K̂_σ(t) = K̂(σt)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gridfn::{Grid, GridFunction};
use crate::special::neumaier_sum;

/// Kernel families. Parameters other than the scale live here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Gaussian,
    Cauchy,
    /// Symmetric stable law with characteristic exponent `r ∈ (0, 2]`.
    Stable { r: f64 },
    StudentT { nu: f64 },
    /// Fejér–de la Vallée-Poussin density, `f̂(t) = (1 - |t|)^+`.
    Fvp,
    /// `sin x / (πx)`, with indicator spectrum on `[-1, 1]`.
    Sinc,
    /// Trapezoidal spectrum: 1 on `[-flat, flat]`, linear to 0 at `±cutoff`.
    Superkernel { flat: f64, cutoff: f64 },
}

/// Parameters `(ρ, r, L)` of the class `A^{ρ,r,L}` plus the spectral
/// support `S_f` (`+∞` when the transform never vanishes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupersmoothClass {
    pub rho: f64,
    pub r: f64,
    pub l: f64,
    pub spectral_support: f64,
}

impl SupersmoothClass {
    /// Truncated `I^{ρ,r}(f) = ∫ e^{2(ρ|t|)^r} |f̂(t)|² dt` on the grid.
    /// Frequencies where `|f̂|` sits below `1e-14·max|f̂|` are dropped: there
    /// the spectrum is round-off and the weight would only amplify it.
    pub fn i_integral(f: &GridFunction, rho: f64, r: f64) -> f64 {
        let spec = f.spectrum();
        let grid = f.grid();
        let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let step = grid.frequency_step();
        neumaier_sum(spec.iter().enumerate().filter_map(|(m, z)| {
            let a = z.norm();
            if a <= 1e-14 * peak {
                return None;
            }
            let t = grid.frequency(m).abs();
            Some((2.0 * (rho * t).powf(r)).exp() * a * a * step)
        }))
    }

    /// `S_f = sup{|t| : |f̂(t)| > 1e-14}`; infinite when content reaches the
    /// top tenth of the band.
    pub fn spectral_support_of(f: &GridFunction) -> f64 {
        let band = f.effective_bandwidth_abs(1e-14);
        if band >= 0.9 * f.grid().nyquist() {
            f64::INFINITY
        } else {
            band
        }
    }

    /// Class description of `f` for the given `(ρ, r)`, with `L = I/(2π)`.
    pub fn from_grid(f: &GridFunction, rho: f64, r: f64) -> Self {
        SupersmoothClass {
            rho,
            r,
            l: Self::i_integral(f, rho, r) / (2.0 * PI),
            spectral_support: Self::spectral_support_of(f),
        }
    }

    /// Decay law `e^{-α (ρ/σ)^r}` of the sinc approximation error.
    pub fn decay_law(&self, alpha: f64, sigma: f64) -> f64 {
        (-alpha * (self.rho / sigma).powf(self.r)).exp()
    }
}

/// A kernel family at a given scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: Family,
    pub scale: f64,
}

impl KernelSpec {
    pub fn new(family: Family, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NonPositiveSigma(scale));
        }
        match family {
            Family::Stable { r } if !(r > 0.0 && r <= 2.0) => Err(Error::InvalidParameter(
                format!("stable exponent {r} outside (0, 2]"),
            )),
            Family::StudentT { nu } if !(nu > 0.0) => Err(Error::InvalidParameter(format!(
                "degrees of freedom {nu}"
            ))),
            Family::Superkernel { flat, cutoff } if !(flat > 0.0 && flat < cutoff) => {
                Err(Error::InvalidShape { flat, cutoff })
            }
            _ => Ok(KernelSpec { family, scale }),
        }
    }

    pub fn gaussian(scale: f64) -> Self {
        KernelSpec {
            family: Family::Gaussian,
            scale,
        }
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        KernelSpec {
            family: self.family,
            scale,
        }
    }

    /// `K̂_σ(t)` when a closed form exists (all families but Student-t).
    pub fn fourier(&self, t: f64) -> Option<f64> {
        let u = (self.scale * t).abs();
        Some(match self.family {
            Family::Gaussian => (-0.5 * u * u).exp(),
            Family::Cauchy => (-u).exp(),
            Family::Stable { r } => (-u.powf(r)).exp(),
            Family::StudentT { .. } => return None,
            Family::Fvp => (1.0 - u).max(0.0),
            Family::Sinc => {
                if u <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Superkernel { flat, cutoff } => trapezoid(u, flat, cutoff),
        })
    }

    /// `K_σ(x)` in closed form where one exists (not for general stable laws).
    pub fn density(&self, x: f64) -> Option<f64> {
        let s = self.scale;
        let y = x / s;
        let v = match self.family {
            Family::Gaussian => (-0.5 * y * y).exp() / (2.0 * PI).sqrt(),
            Family::Cauchy => 1.0 / (PI * (1.0 + y * y)),
            Family::Stable { r } if r == 2.0 => {
                // e^{-t²} is N(0, 2)
                (-0.25 * y * y).exp() / (4.0 * PI).sqrt()
            }
            Family::Stable { r } if r == 1.0 => 1.0 / (PI * (1.0 + y * y)),
            Family::Stable { .. } => return None,
            Family::StudentT { nu } => student_t_density(y, nu),
            Family::Fvp => {
                if y.abs() < 1e-8 {
                    1.0 / (2.0 * PI) * (1.0 - y * y / 12.0)
                } else {
                    let h = 0.5 * y;
                    (h.sin() / h).powi(2) / (2.0 * PI)
                }
            }
            Family::Sinc => {
                if y.abs() < 1e-8 {
                    (1.0 - y * y / 6.0) / PI
                } else {
                    y.sin() / (PI * y)
                }
            }
            Family::Superkernel { flat, cutoff } => superkernel_density(y, flat, cutoff),
        };
        Some(v / s)
    }

    /// True for the honest probability densities of the catalog.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self.family, Family::Sinc | Family::Superkernel { .. })
    }

    /// Symmetric and decreasing in `|x|` (symmetric stable laws are unimodal).
    pub fn is_monotone(&self) -> bool {
        matches!(
            self.family,
            Family::Gaussian | Family::Cauchy | Family::Stable { .. } | Family::StudentT { .. }
        )
    }

    /// `∥K_σ∥_∞`; every nonnegative family peaks at the origin.
    pub fn sup_norm(&self) -> f64 {
        match self.family {
            Family::Stable { r } => {
                // K(0) = (2π)^{-1} ∫ e^{-|t|^r} dt = Γ(1 + 1/r)/π
                (ln_gamma(1.0 + 1.0 / r)).exp() / (PI * self.scale)
            }
            _ => self.density(0.0).expect("closed form at the origin").abs(),
        }
    }

    /// Nominal supersmooth parameters `(ρ, r)` and spectral support.
    ///
    /// Gaussian `r = 2, ρ = σ/√2`; Cauchy `r = 1, ρ = σ`; stable `ρ = σ`.
    /// For Student-t the transform carries a polynomial factor
    /// `|t|^{(ν-1)/2}` in front of `e^{-√ν σ|t|}`, so the envelope uses the
    /// conservative `ρ = √ν σ / 2`. Band-limited families report `r = 1`,
    /// `ρ = σ` (any choice is admissible) with finite spectral support.
    pub fn class_params(&self) -> (f64, f64, f64) {
        let s = self.scale;
        match self.family {
            Family::Gaussian => (s / 2f64.sqrt(), 2.0, f64::INFINITY),
            Family::Cauchy => (s, 1.0, f64::INFINITY),
            Family::Stable { r } => (s, r, f64::INFINITY),
            Family::StudentT { nu } => (0.5 * nu.sqrt() * s, 1.0, f64::INFINITY),
            Family::Fvp | Family::Sinc => (s, 1.0, 1.0),
            Family::Superkernel { cutoff, .. } => (s, 1.0, cutoff),
        }
    }

    /// Samples `K_σ` on `grid`.
    ///
    /// Families with a closed-form transform other than the Gaussian are
    /// synthesized from their spectrum (the exact periodization of the
    /// density). The Gaussian is sampled in real space. Student-t is sampled
    /// in real space with its periodic images summed.
    pub fn grid(&self, grid: Grid) -> Result<GridFunction> {
        let min = 4.0 * grid.spacing();
        if self.scale < min {
            return Err(Error::ScaleTooSmall {
                scale: self.scale,
                min,
            });
        }
        Ok(match self.family {
            Family::Gaussian => GridFunction::from_fn(grid, |x| self.density(x).unwrap()),
            Family::StudentT { nu } => self.student_t_periodized(grid, nu),
            _ => GridFunction::from_spectrum_fn(grid, |t| {
                Complex64::new(self.fourier(t).unwrap(), 0.0)
            }),
        })
    }

    /// Real part of `K̂_σ` at every grid frequency, either in closed form or
    /// from the sampled kernel.
    pub fn spectrum_on(&self, grid: Grid) -> Result<Vec<f64>> {
        match self.family {
            Family::StudentT { .. } => Ok(self.grid(grid)?.spectrum().iter().map(|z| z.re).collect()),
            _ => Ok(grid.frequencies().map(|t| self.fourier(t).unwrap()).collect()),
        }
    }

    fn student_t_periodized(&self, grid: Grid, nu: f64) -> GridFunction {
        const IMAGES: i64 = 64;
        let period = 2.0 * grid.half_width();
        let s = self.scale;
        // mass beyond the summed images, spread evenly over one period
        let reach = (IMAGES as f64 + 0.5) * period / s;
        let tail = StudentsT::new(0.0, 1.0, nu)
            .map(|d| 2.0 * d.sf(reach))
            .unwrap_or(0.0);
        let floor = tail / period;
        GridFunction::from_fn_periodic(grid, |x| {
            let mut acc = student_t_density(x / s, nu) / s;
            for j in 1..=IMAGES {
                let shift = j as f64 * period;
                acc += student_t_density((x + shift) / s, nu) / s;
                acc += student_t_density((x - shift) / s, nu) / s;
            }
            acc + floor
        })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.scale;
        match self.family {
            Family::Gaussian => write!(f, "gaussian:{s}"),
            Family::Cauchy => write!(f, "cauchy:{s}"),
            Family::Stable { r } => write!(f, "stable:{r}:{s}"),
            Family::StudentT { nu } => write!(f, "student_t:{nu}:{s}"),
            Family::Fvp => write!(f, "fvp:{s}"),
            Family::Sinc => write!(f, "sinc:{s}"),
            Family::Superkernel { flat, cutoff } => write!(f, "superkernel:{flat}:{cutoff}:{s}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// `name[:params...][:scale]`, e.g. `gaussian:1.0`, `stable:1.5:1.0`,
    /// `student_t:3:0.5`, `superkernel:1:2:1`. A missing scale means 1.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts[i]
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("`{}` in `{s}`", parts[i])))
        };
        let name = parts[0].to_ascii_lowercase();
        let (family, extra) = match name.as_str() {
            "gaussian" | "normal" => (Family::Gaussian, 0),
            "cauchy" => (Family::Cauchy, 0),
            "fvp" => (Family::Fvp, 0),
            "sinc" => (Family::Sinc, 0),
            "stable" => {
                if parts.len() < 2 {
                    return Err(Error::InvalidParameter(format!("`{s}` needs an exponent")));
                }
                (Family::Stable { r: num(1)? }, 1)
            }
            "student_t" | "student" | "t" => {
                if parts.len() < 2 {
                    return Err(Error::InvalidParameter(format!("`{s}` needs degrees of freedom")));
                }
                (Family::StudentT { nu: num(1)? }, 1)
            }
            "superkernel" => {
                if parts.len() >= 3 {
                    (
                        Family::Superkernel {
                            flat: num(1)?,
                            cutoff: num(2)?,
                        },
                        2,
                    )
                } else {
                    (
                        Family::Superkernel {
                            flat: 1.0,
                            cutoff: 2.0,
                        },
                        0,
                    )
                }
            }
            _ => return Err(Error::UnknownFamily(parts[0].to_string())),
        };
        let scale = match parts.len() - 1 - extra {
            0 => 1.0,
            1 => num(1 + extra)?,
            _ => return Err(Error::InvalidParameter(format!("too many fields in `{s}`"))),
        };
        KernelSpec::new(family, scale)
    }
}

fn trapezoid(u: f64, flat: f64, cutoff: f64) -> f64 {
    if u <= flat {
        1.0
    } else if u >= cutoff {
        0.0
    } else {
        (cutoff - u) / (cutoff - flat)
    }
}

/// Inverse transform of the trapezoid: `(cos(a x) − cos(b x)) / (π (b−a) x²)`.
fn superkernel_density(x: f64, a: f64, b: f64) -> f64 {
    if x.abs() < 1e-6 {
        // Taylor: (b² − a²)/2 − (b⁴ − a⁴) x²/24
        ((b * b - a * a) / 2.0 - (b.powi(4) - a.powi(4)) * x * x / 24.0) / (PI * (b - a))
    } else {
        // cos a x − cos b x = 2 sin((b+a)x/2) sin((b−a)x/2)
        2.0 * (0.5 * (b + a) * x).sin() * (0.5 * (b - a) * x).sin() / (PI * (b - a) * x * x)
    }
}

fn student_t_density(y: f64, nu: f64) -> f64 {
    let ln_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    (ln_c - 0.5 * (nu + 1.0) * (y * y / nu).ln_1p()).exp()
}

/// Samples `K_σ` on a grid; see [`KernelSpec::grid`].
pub fn kernel_grid(spec: &KernelSpec, grid: Grid) -> Result<GridFunction> {
    spec.grid(grid)
}

/// Trapezoidal-spectrum superkernel at unit scale.
pub fn build_superkernel(flat: f64, cutoff: f64, grid: Grid) -> Result<GridFunction> {
    KernelSpec::new(Family::Superkernel { flat, cutoff }, 1.0)?.grid(grid)
}

/// `∥f ∗ sinc_σ − f∥_p`, for `p ∈ [2, ∞]`.
pub fn sinc_approx_error(f: &GridFunction, sigma: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 2.0 {
        return Err(Error::InvalidP(p));
    }
    f.band_limit(1.0 / sigma)?.lp_distance(f, p)
}

/// `∥f ∗ S_σ − f∥_p` for the trapezoidal superkernel `S`, `p ∈ [1, ∞]`.
pub fn superkernel_approx_error(
    f: &GridFunction,
    sigma: f64,
    p: f64,
    flat: f64,
    cutoff: f64,
) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    let nyquist = f.grid().nyquist();
    if cutoff / sigma > nyquist {
        return Err(Error::CutoffAboveNyquist {
            cutoff: cutoff / sigma,
            nyquist,
        });
    }
    let spec = KernelSpec::new(Family::Superkernel { flat, cutoff }, sigma)?;
    f.apply_real_multiplier(|t| spec.fourier(t).unwrap())
        .lp_distance(f, p)
}

/// Partial sums `Σ_{k=1}^n [sinc(x_k) − sinc(x_{k−1})]²` at the extrema
/// `x_k = (2k+1)π/2`.
pub fn sinc_quadratic_variation(n_extrema: usize) -> f64 {
    let sinc = |x: f64| x.sin() / (PI * x);
    let point = |k: usize| (2 * k + 1) as f64 * PI / 2.0;
    neumaier_sum((1..=n_extrema).map(|k| (sinc(point(k)) - sinc(point(k - 1))).powi(2)))
}

/// `τ` with `∫_0^{len} K_τ = ζ` for a nonnegative symmetric kernel with a
/// closed-form density. Requires `ζ < 1/2`.
pub fn convolution_floor_scale(kernel: &KernelSpec, len: f64, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 0.5) || !kernel.is_nonnegative() {
        return Err(Error::InvalidParameter(format!(
            "zeta = {zeta} must lie in (0, 1/2) for a symmetric density kernel"
        )));
    }
    // ∫_0^len K_τ = ∫_0^{len/τ} K, decreasing in τ; bisection on log τ
    let mass = |tau: f64| half_line_mass(&kernel.with_scale(1.0), len / tau);
    let (mut lo, mut hi) = (1e-6 * len, 1e6 * len);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mass(mid) >= zeta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `∫_0^y K` for a unit-scale nonnegative kernel.
fn half_line_mass(kernel: &KernelSpec, y: f64) -> f64 {
    match kernel.family {
        Family::Gaussian => 0.5 * statrs::function::erf::erf(y / 2f64.sqrt()),
        Family::Cauchy => y.atan() / PI,
        _ => {
            // composite Simpson on the closed-form density
            let n = 2000;
            let h = y / n as f64;
            let f = |x: f64| kernel.density(x).unwrap_or(0.0);
            let s = neumaier_sum((0..=n).map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * f(i as f64 * h)
            }));
            s * h / 3.0
        }
    }
}

/// Envelope shape `(1 + √3 σ|t|) e^{-√3 σ|t|}` of the Student-t(3) transform.
pub fn student_t3_transform(sigma: f64, t: f64) -> f64 {
    let u = 3f64.sqrt() * sigma * t.abs();
    (1.0 + u) * (-u).exp()
}


#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::default()
    }

    #[test]
    fn sinc_at_origin() {
        let k: KernelSpec = "sinc:1".parse().unwrap();
        assert_eq!(k.density(0.0).unwrap(), 1.0 / PI);
    }

    #[test]
    fn gaussian_spectrum() {
        let g = KernelSpec::gaussian(1.0).grid(grid()).unwrap();
        for (m, z) in g.spectrum().iter().enumerate() {
            let t = grid().frequency(m);
            assert!((z.re - (-0.5 * t * t).exp()).abs() <= 1e-10);
        }
    }

    #[test]
    fn unit_mass() {
        for id in ["gaussian:1", "cauchy:0.5", "stable:1.5:1", "student_t:3:0.5", "fvp:1", "sinc:0.5", "superkernel:1:2:0.7", "student_t:1:0.3"] {
            let k: KernelSpec = id.parse().unwrap();
            let g = k.grid(grid()).unwrap();
            assert!((g.integral() - 1.0).abs() <= 1e-8, "{id}: {}", g.integral());
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("laplace:1".parse::<KernelSpec>(), Err(Error::UnknownFamily(_))));
        assert!("stable:2.5:1".parse::<KernelSpec>().is_err());
        assert!(matches!(
            "superkernel:2:1:1".parse::<KernelSpec>(),
            Err(Error::InvalidShape { .. })
        ));
        let k: KernelSpec = "stable:1.5:0.7".parse().unwrap();
        assert_eq!(k.to_string().parse::<KernelSpec>().unwrap(), k);
    }

    #[test]
    fn scale_too_small() {
        let k = KernelSpec::gaussian(0.01);
        assert!(matches!(k.grid(grid()), Err(Error::ScaleTooSmall { .. })));
    }

    #[test]
    fn superkernel_shape() {
        let k = KernelSpec::new(Family::Superkernel { flat: 1.0, cutoff: 2.0 }, 1.0).unwrap();
        assert_eq!(k.fourier(0.5).unwrap(), 1.0);
        assert_eq!(k.fourier(1.5).unwrap(), 0.5);
        assert_eq!(k.fourier(2.5).unwrap(), 0.0);
        let s = build_superkernel(1.0, 2.0, grid()).unwrap();
        assert!((s.integral() - 1.0).abs() <= 1e-10);
        for (m, z) in s.spectrum().iter().enumerate() {
            if grid().frequency(m).abs() > 1.0 + 1e-12 {
                assert!(z.norm() < 1.0);
            }
        }
        // grid samples are the periodization of the closed-form density
        let period = 2.0 * grid().half_width();
        for k_idx in (0..grid().len()).step_by(97) {
            let x = grid().x(k_idx);
            let images: f64 = (-2000..=2000)
                .map(|j| k.density(x + j as f64 * period).unwrap())
                .sum();
            assert!((s.values()[k_idx] - images).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn superkernel_l1_norm() {
        // ∫|S| for (1,2), frozen from adaptive quadrature of
        // |cos x − cos 2x|/(πx²) over the real line
        const L1: f64 = 1.435_991_124_176_92;
        let s = KernelSpec::new(Family::Superkernel { flat: 1.0, cutoff: 2.0 }, 1.0).unwrap();
        let n = 4_000_000;
        let h = 4000.0 / n as f64;
        let body: f64 =
            neumaier_sum((0..n).map(|i| s.density((i as f64 + 0.5) * h).unwrap().abs())) * h * 2.0;
        // |S| ≤ 2/(πx²) beyond 4000, tail ≤ 4/(π·4000)
        assert!((body - L1).abs() < 4.0 / (PI * 4000.0));
        assert!(L1 <= 2.2);
    }

    #[test]
    fn fvp_sinc_error_vanishes() {
        let f = KernelSpec::new(Family::Fvp, 1.0).unwrap().grid(grid()).unwrap();
        for &sigma in &[1.0, 0.8, 0.5, 0.1] {
            for &p in &[2.0, 3.0, f64::INFINITY] {
                assert!(sinc_approx_error(&f, sigma, p).unwrap() <= 1e-12);
            }
        }
        assert!(sinc_approx_error(&f, 0.5, 1.0).is_err());
    }

    #[test]
    fn gaussian_sinc_error_below_tail_bound() {
        // X chosen so the cutoff t = 4 falls midway between two grid
        // frequencies; the discrete tail sum is then a midpoint rule, which
        // underestimates the integral of the convex tail
        let grid = Grid::new(PI * 50.5 / 4.0, 1 << 14).unwrap();
        let f = KernelSpec::gaussian(1.0).grid(grid).unwrap();
        let err = sinc_approx_error(&f, 0.25, f64::INFINITY).unwrap();
        // (2π)^{-1} ∫_{|t|>4} e^{-t²/2} dt = (2π)^{-1/2} erfc(4/√2)
        let bound = statrs::function::erf::erfc(4.0 / 2f64.sqrt()) / (2.0 * PI).sqrt();
        assert!(err <= bound, "{err} > {bound}");
        assert!(err >= 0.95 * bound);
    }

    #[test]
    fn quadratic_variation_first_term() {
        let s1 = 2.0 / (PI * PI);
        let s3 = -2.0 / (3.0 * PI * PI);
        assert!((sinc_quadratic_variation(1) - (s3 - s1).powi(2)).abs() < 1e-16);
    }

    #[test]
    fn quadratic_variation_is_monotone() {
        let mut prev = 0.0;
        for n in 1..500 {
            let v = sinc_quadratic_variation(n);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn quadratic_variation_tail() {
        // the increments behave like (4/π⁴) k^{-2}, so the n = 10³ → 10⁶ gap
        // is close to (4/π⁴)(10^{-3} − 10^{-6})
        let gap = sinc_quadratic_variation(1_000_000) - sinc_quadratic_variation(1000);
        let predicted = 4.0 / PI.powi(4) * (1e-3 - 1e-6);
        assert!((gap / predicted - 1.0).abs() < 0.01, "{gap} vs {predicted}");
    }

    #[test]
    fn convolution_floor_scale_gaussian() {
        let tau = convolution_floor_scale(&KernelSpec::gaussian(1.0), 2.0, 0.45).unwrap();
        let m = half_line_mass(&KernelSpec::gaussian(1.0), 2.0 / tau);
        assert!((m - 0.45).abs() < 1e-12);
        assert!(convolution_floor_scale(&KernelSpec::gaussian(1.0), 2.0, 0.9).is_err());
    }

    #[test]
    fn student_t3_closed_form_transform() {
        let k: KernelSpec = "student_t:3:0.25".parse().unwrap();
        let g = k.grid(grid()).unwrap();
        for (m, z) in g.spectrum().iter().enumerate().step_by(13) {
            let t = grid().frequency(m);
            if t.abs() <= 40.0 {
                assert!((z.re - student_t3_transform(0.25, t)).abs() < 1e-9, "t = {t}");
            }
        }
    }
}
