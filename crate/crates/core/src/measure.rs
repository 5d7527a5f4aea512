//! Finite discrete mixing measures and the location mixtures they induce.

use rustfft::num_complex::Complex64;

use crate::discretize::gauss_legendre;
use crate::error::{Error, Result};
use crate::gridfn::{Grid, GridFunction};
use crate::kernels::KernelSpec;
use crate::special::neumaier_sum;

/// `F = Σ p_j δ_{θ_j}` with strictly increasing atoms and weights summing
/// to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMixingMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMixingMeasure {
    /// Sorts, merges coincident atoms, drops zero weights and rescales the
    /// weights to sum to one. Fails on negative or non-finite input or on a
    /// total weight of zero.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} atoms with {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|a| !a.is_finite())
            || weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::InvalidParameter(
                "atoms must be finite and weights nonnegative".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .collect();
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("all weights are zero".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            match atoms.last() {
                Some(&last) if last == a => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(a);
                    weights.push(w);
                }
            }
        }
        let total = neumaier_sum(weights.iter().copied());
        for w in &mut weights {
            *w /= total;
        }
        Ok(DiscreteMixingMeasure { atoms, weights })
    }

    pub fn dirac(at: f64) -> Self {
        DiscreteMixingMeasure {
            atoms: vec![at],
            weights: vec![1.0],
        }
    }

    /// Gauss–Legendre discretization of a density on `[lo, hi]`; the moments
    /// of the result are exact up to order `2·order − 1` for polynomial
    /// densities.
    pub fn from_density(f: impl Fn(f64) -> f64, lo: f64, hi: f64, order: usize) -> Result<Self> {
        let (nodes, w) = gauss_legendre(order)?;
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let atoms: Vec<f64> = nodes.iter().map(|y| c + h * y).collect();
        let weights: Vec<f64> = atoms.iter().zip(&w).map(|(x, wi)| f(*x) * wi).collect();
        Self::new(atoms, weights)
    }

    /// Composite Gauss–Legendre discretization: `cells` equal panels with
    /// `order` nodes each.
    pub fn from_density_panels(
        f: impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        cells: usize,
        order: usize,
    ) -> Result<Self> {
        let (nodes, w) = gauss_legendre(order)?;
        let width = (hi - lo) / cells as f64;
        let mut atoms = Vec::with_capacity(cells * order);
        let mut weights = Vec::with_capacity(cells * order);
        for c in 0..cells {
            let mid = lo + (c as f64 + 0.5) * width;
            for (y, wi) in nodes.iter().zip(&w) {
                let x = mid + 0.5 * width * y;
                atoms.push(x);
                weights.push(f(x) * wi);
            }
        }
        Self::new(atoms, weights)
    }

    /// Grid measure with weight `Δ·f(x_k)` at every grid point inside
    /// `[lo, hi]`; returns the measure and the captured mass.
    pub fn from_grid_restricted(f: &GridFunction, lo: f64, hi: f64) -> Result<(Self, f64)> {
        let dx = f.grid().spacing();
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (x, v) in f.grid().points().zip(f.values()) {
            if x >= lo && x <= hi {
                atoms.push(x);
                weights.push(v.max(0.0) * dx);
            }
        }
        let mass = neumaier_sum(weights.iter().copied());
        Ok((Self::new(atoms, weights)?, mass))
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    /// `∫ θ^j dF` about `center`.
    pub fn moment(&self, j: u32, center: f64) -> f64 {
        neumaier_sum(
            self.atoms
                .iter()
                .zip(&self.weights)
                .map(|(a, w)| w * (a - center).powi(j as i32)),
        )
    }

    /// Restriction to `[lo, hi]`, renormalized, with its original mass.
    /// `None` when the interval carries no mass.
    pub fn restrict(&self, lo: f64, hi: f64) -> Option<(Self, f64)> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            if a >= lo && a <= hi {
                atoms.push(a);
                weights.push(w);
            }
        }
        let mass = neumaier_sum(weights.iter().copied());
        if mass <= 0.0 {
            return None;
        }
        Some((Self::new(atoms, weights).ok()?, mass))
    }

    /// Mixture of measures with the given mixing proportions.
    pub fn combine(parts: &[(Self, f64)]) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (m, mass) in parts {
            for (&a, &w) in m.atoms.iter().zip(&m.weights) {
                atoms.push(a);
                weights.push(w * mass);
            }
        }
        Self::new(atoms, weights)
    }

    /// `F(x) = Σ_{θ_j ≤ x} p_j`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        neumaier_sum(self.weights[..k].iter().copied()).min(1.0)
    }

    /// Left-continuous quantile `Q(u) = inf{θ : F(θ) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            acc += w;
            if acc >= u {
                return a;
            }
        }
        self.max_atom()
    }

    /// `F̂(t) = Σ p_j e^{itθ_j}` at every grid frequency, in FFT order.
    pub fn characteristic_on(&self, grid: Grid) -> Vec<Complex64> {
        let n = grid.len();
        let half = n / 2;
        let h = grid.frequency_step();
        let mut acc = vec![Complex64::new(0.0, 0.0); half + 1];
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            let step = Complex64::from_polar(1.0, h * a);
            let mut z = Complex64::new(w, 0.0);
            for (m, slot) in acc.iter_mut().enumerate() {
                *slot += z;
                z *= step;
                // renormalize the rotation every so often to stop drift
                if m % 512 == 511 {
                    z = Complex64::from_polar(w, h * a * (m + 1) as f64);
                }
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[..half].copy_from_slice(&acc[..half]);
        // bin n/2 is frequency −π/Δ, the conjugate of +π/Δ
        out[half] = acc[half].conj();
        for m in 1..half {
            out[n - m] = acc[m].conj();
        }
        out
    }

    /// `F ∗ K_σ` on `grid`, synthesized from `F̂(t) K̂(σt)`.
    pub fn mixture_density(&self, kernel: &KernelSpec, grid: Grid) -> Result<GridFunction> {
        let kh = kernel.spectrum_on(grid)?;
        let spec = self
            .characteristic_on(grid)
            .into_iter()
            .zip(kh)
            .map(|(z, k)| z * k)
            .collect();
        GridFunction::from_spectrum(grid, spec)
    }

    /// `F ∗ φ_σ` on `grid` by direct summation, each atom contributing only
    /// within `±38.6σ` where `φ` is above the smallest normal double. Values
    /// are nonnegative and free of spectral round-off, which the spectral
    /// route cannot offer in the far tails.
    pub fn gaussian_mixture_direct(&self, sigma: f64, grid: Grid) -> Result<GridFunction> {
        if !(sigma > 0.0) {
            return Err(Error::NonPositiveSigma(sigma));
        }
        let n = grid.len();
        let dx = grid.spacing();
        let x0 = -grid.half_width();
        let reach = 38.6 * sigma;
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let mut values = vec![0.0; n];
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            let lo = (((a - reach - x0) / dx).floor().max(0.0)) as usize;
            let hi = ((((a + reach - x0) / dx).ceil()).max(0.0) as usize).min(n - 1);
            for (k, v) in values.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let z = (x0 + k as f64 * dx - a) / sigma;
                *v += w * norm * (-0.5 * z * z).exp();
            }
        }
        GridFunction::from_values(grid, values)
    }

    /// `F ∗ K_σ` at a point, for kernels with a closed-form density.
    pub fn mixture_at(&self, kernel: &KernelSpec, x: f64) -> Option<f64> {
        let mut terms = Vec::with_capacity(self.len());
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            terms.push(w * kernel.density(x - a)?);
        }
        Some(neumaier_sum(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_sorts_and_merges() {
        let m = DiscreteMixingMeasure::new(vec![1.0, -1.0, 1.0, 3.0], vec![1.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(m.atoms(), &[-1.0, 1.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert!(DiscreteMixingMeasure::new(vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn quantiles() {
        let m = DiscreteMixingMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.quantile(0.25), 0.0);
        assert_eq!(m.quantile(0.75), 1.0);
        assert_eq!(m.cdf(0.5), 0.5);
    }

    #[test]
    fn spectral_mixture_matches_direct_sum() {
        let grid = Grid::new(20.0, 4096).unwrap();
        let m = DiscreteMixingMeasure::new(vec![-2.3, 0.1, 1.7], vec![0.2, 0.5, 0.3]).unwrap();
        let k = KernelSpec::gaussian(0.6);
        let g = m.mixture_density(&k, grid).unwrap();
        for (i, x) in grid.points().enumerate().step_by(31) {
            let direct = m.mixture_at(&k, x).unwrap();
            assert!((g.values()[i] - direct).abs() < 1e-12);
        }
        let h = m.gaussian_mixture_direct(0.6, grid).unwrap();
        assert!(h.sup_distance(&g).unwrap() < 1e-12);
        assert!(h.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn density_discretization_moments() {
        let m = DiscreteMixingMeasure::from_density(|_| 0.25, -2.0, 2.0, 20).unwrap();
        assert!((m.moment(2, 0.0) - 4.0 / 3.0).abs() < 1e-13);
        assert!((m.moment(4, 0.0) - 16.0 / 5.0).abs() < 1e-12);
    }
}
