//! Uniform-grid functions with a cached discrete Fourier twin.
//!
//! A [`GridFunction`] stores samples `f(x_k)` at `x_k = -X + k·Δ`,
//! `k = 0..n`, with `Δ = 2X/n` and `n` a power of two. Its spectrum
//! approximates `f̂(t) = ∫ e^{itx} f(x) dx` at the frequencies
//! `t_m = 2π m / (nΔ)`, stored in FFT order (non-negative frequencies first,
//! then the negative ones; index `n/2` is the Nyquist bin `-π/Δ`).
//!
//! Convolution, band limiting, shifts and differentiation are spectral
//! multipliers. Functions built from a closed-form transform are the exact
//! periodization of the continuous density onto the grid; they are flagged
//! `periodic` and exempt from the aliasing check in [`GridFunction::convolve`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::special::neumaier_sum;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// A uniform symmetric grid on `[-X, X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_points: usize,
}

impl Default for Grid {
    /// `X = 40`, `n = 2^14`.
    fn default() -> Self {
        Grid {
            half_width: 40.0,
            n_points: 1 << 14,
        }
    }
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width {half_width}")));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{n_points} points is not a power of two >= 8"
            )));
        }
        Ok(Grid {
            half_width,
            n_points,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `Δ = 2X/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.x(k))
    }

    /// Index of the grid point `x = 0`.
    pub fn origin(&self) -> usize {
        self.n_points / 2
    }

    /// Frequency spacing `2π/(nΔ) = π/X`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_width
    }

    /// Frequency of FFT bin `m`.
    pub fn frequency(&self, m: usize) -> f64 {
        let n = self.n_points;
        let signed = if m < n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        };
        signed * self.frequency_step()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |m| self.frequency(m))
    }

    /// `π/Δ`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(
                self.half_width,
                self.n_points,
                other.half_width,
                other.n_points,
            ));
        }
        Ok(())
    }
}

/// Forward transform: samples → `f̂(t_m)` under the `e^{itx}` convention.
fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let n = grid.len();
    let (_, inverse) = plans(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    inverse.process(&mut buf);
    let dx = grid.spacing();
    for (m, z) in buf.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { dx } else { -dx };
        *z *= sign;
    }
    buf
}

/// Inverse transform: `f̂(t_m)` → real samples.
fn backward(grid: &Grid, spectrum: &[Complex64]) -> Vec<f64> {
    let n = grid.len();
    let (fwd, _) = plans(n);
    let scale = 1.0 / (n as f64 * grid.spacing());
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(m, &z)| if m % 2 == 0 { z * scale } else { -z * scale })
        .collect();
    fwd.process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// A real function sampled on a [`Grid`], with a lazily computed spectrum.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
    periodic: bool,
}

impl GridFunction {
    /// Wraps raw samples. The function is treated as compactly supported in
    /// `[-X, X)` for aliasing checks.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction {
            grid,
            values,
            spectrum: OnceLock::new(),
            periodic: false,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        GridFunction {
            grid,
            values,
            spectrum: OnceLock::new(),
            periodic: false,
        }
    }

    /// Samples of an already periodized function (e.g. with images summed).
    pub fn from_fn_periodic(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let mut out = Self::from_fn(grid, f);
        out.periodic = true;
        out
    }

    /// Builds the periodized function whose transform at each grid
    /// frequency is `spectrum[m]`. The Nyquist bin is made real so the
    /// synthesized samples are real.
    pub fn from_spectrum(grid: Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} spectral samples for a {}-point grid",
                spectrum.len(),
                grid.len()
            )));
        }
        let nyq = grid.len() / 2;
        spectrum[nyq].im = 0.0;
        let values = backward(&grid, &spectrum);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Ok(GridFunction {
            grid,
            values,
            spectrum: cell,
            periodic: true,
        })
    }

    /// Periodized function with transform `fhat(t)` sampled at grid frequencies.
    pub fn from_spectrum_fn(grid: Grid, fhat: impl Fn(f64) -> Complex64) -> Self {
        let spectrum = grid.frequencies().map(fhat).collect();
        Self::from_spectrum(grid, spectrum).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| forward(&self.grid, &self.values))
    }

    /// Applies `multiplier(t)` to the spectrum and re-synthesizes.
    pub fn apply_multiplier(&self, multiplier: impl Fn(f64) -> Complex64) -> GridFunction {
        let spectrum = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(m, &z)| z * multiplier(self.grid.frequency(m)))
            .collect();
        let mut out = GridFunction::from_spectrum(self.grid, spectrum).expect("same grid");
        out.periodic = self.periodic;
        out
    }

    /// Real-valued multiplier variant of [`GridFunction::apply_multiplier`].
    pub fn apply_real_multiplier(&self, multiplier: impl Fn(f64) -> f64) -> GridFunction {
        self.apply_multiplier(|t| Complex64::new(multiplier(t), 0.0))
    }

    /// `f(· - shift)`, realized as the multiplier `e^{it·shift}`.
    pub fn translate(&self, shift: f64) -> GridFunction {
        self.apply_multiplier(|t| Complex64::from_polar(1.0, t * shift))
    }

    /// Fraction of the L¹ mass lying in the outer 10% of the grid.
    pub fn outer_mass_fraction(&self) -> f64 {
        let x_in = 0.9 * self.grid.half_width;
        let mut outer = 0.0;
        let mut total = 0.0;
        for (x, v) in self.grid.points().zip(&self.values) {
            total += v.abs();
            if x.abs() > x_in {
                outer += v.abs();
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }

    fn check_aliasing(&self) -> Result<()> {
        if self.periodic {
            return Ok(());
        }
        let mass = self.outer_mass_fraction();
        if mass > 1e-6 {
            return Err(Error::AliasingRisk { mass });
        }
        Ok(())
    }

    /// Spectral convolution `f ∗ g`.
    ///
    /// Functions sampled in real space must keep their L¹ mass away from the
    /// grid boundary; periodized (spectrally defined) functions are accepted
    /// as they are.
    pub fn convolve(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        self.check_aliasing()?;
        other.check_aliasing()?;
        Ok(self.convolve_unchecked(other))
    }

    /// Spectral convolution without support checks (circular on the grid).
    pub fn convolve_unchecked(&self, other: &GridFunction) -> GridFunction {
        let spectrum = self
            .spectrum()
            .iter()
            .zip(other.spectrum())
            .map(|(a, b)| a * b)
            .collect();
        let mut out = GridFunction::from_spectrum(self.grid, spectrum).expect("same grid");
        out.periodic = self.periodic || other.periodic;
        out
    }

    /// Zeroes the spectrum outside `[-T, T]`; equals convolution with the
    /// sinc kernel at bandwidth `1/T`.
    pub fn band_limit(&self, cutoff: f64) -> Result<GridFunction> {
        let nyquist = self.grid.nyquist();
        if !(cutoff > 0.0) || cutoff > nyquist * (1.0 + 1e-12) {
            return Err(Error::CutoffAboveNyquist { cutoff, nyquist });
        }
        let mut out = self.apply_real_multiplier(|t| if t.abs() <= cutoff { 1.0 } else { 0.0 });
        out.periodic = true;
        Ok(out)
    }

    /// Largest `|t|` whose spectral coefficient exceeds `rel_tol · max|f̂|`.
    pub fn effective_bandwidth(&self, rel_tol: f64) -> f64 {
        let spec = self.spectrum();
        let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        spec.iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > rel_tol * peak)
            .map(|(m, _)| self.grid.frequency(m).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|t|` whose spectral coefficient exceeds `tol` in modulus.
    pub fn effective_bandwidth_abs(&self, tol: f64) -> f64 {
        self.spectrum()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > tol)
            .map(|(m, _)| self.grid.frequency(m).abs())
            .fold(0.0, f64::max)
    }

    /// Applies the derivative multiplier `(-it)^j`.
    ///
    /// Fails when the function carries spectral content in the top 10% of
    /// the band, where the multiplier would amplify noise.
    pub fn spectral_derivative(&self, order: u32) -> Result<GridFunction> {
        let nyquist = self.grid.nyquist();
        let band = self.effective_bandwidth(1e-10);
        if band > 0.9 * nyquist {
            return Err(Error::CutoffAboveNyquist {
                cutoff: band,
                nyquist,
            });
        }
        let nyq_freq = -nyquist;
        Ok(self.apply_multiplier(|t| {
            if order % 2 == 1 && t == nyq_freq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -t).powu(order)
            }
        }))
    }

    /// Riemann-sum `L^p` norm for finite `p`, max-abs for `p = ∞`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(&self.values, self.grid.spacing(), p)
    }

    pub fn integral(&self) -> f64 {
        neumaier_sum(self.values.iter().copied()) * self.grid.spacing()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
            periodic: self.periodic,
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            spectrum: OnceLock::new(),
            periodic: self.periodic || other.periodic,
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> GridFunction {
        self.map(|v| v * factor)
    }

    /// Sup-norm distance to `other`.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `L^p` distance to `other`.
    pub fn lp_distance(&self, other: &GridFunction, p: f64) -> Result<f64> {
        self.sub(other)?.lp_norm(p)
    }
}

/// `L^p` norm of samples with spacing `dx`.
pub fn lp_norm_of(values: &[f64], dx: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let peak = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    // scale by the peak to keep |v|^p representable for large p
    let s = neumaier_sum(values.iter().map(|v| (v.abs() / peak).powf(p)));
    Ok(peak * (s * dx).powf(1.0 / p))
}
