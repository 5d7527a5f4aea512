//! Pitman–Yor stick-breaking.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::base::BaseMeasure;
use crate::error::{Error, Result};
use crate::measure::DiscreteMixingMeasure;

/// Hard cap on the number of sticks drawn by [`py_sample`].
pub const MAX_STICKS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PYParams {
    /// Concentration `c > −d`.
    pub c: f64,
    /// Discount `d ∈ [0, 1)`.
    pub d: f64,
    pub base: BaseMeasure,
}

impl PYParams {
    pub fn new(c: f64, d: f64, base: BaseMeasure) -> Result<Self> {
        if !(0.0..1.0).contains(&d) || !(c > -d) || !c.is_finite() {
            return Err(Error::InvalidDiscount { c, d });
        }
        Ok(PYParams { c, d, base })
    }

    /// Dirichlet process: `d = 0`, `c = α(ℝ)`.
    pub fn dirichlet(base: BaseMeasure) -> Self {
        PYParams {
            c: base.total_mass,
            d: 0.0,
            base,
        }
    }

    /// Law of stick `j` (1-based): `Beta(1 − d, c + d j)`.
    pub fn stick_law(&self, j: usize) -> Beta<f64> {
        Beta::new(1.0 - self.d, self.c + self.d * j as f64).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StickBreakingDraw {
    pub sticks: Vec<f64>,
    pub weights: Vec<f64>,
    pub atoms: Vec<f64>,
    /// `Π_j (1 − V_j)`, the mass not yet assigned.
    pub remainder: f64,
}

impl StickBreakingDraw {
    /// `W_j = V_j Π_{h<j} (1 − V_h)` and the remainder from given sticks.
    pub fn from_sticks(sticks: Vec<f64>, atoms: Vec<f64>) -> Self {
        let mut weights = Vec::with_capacity(sticks.len());
        let mut remainder = 1.0;
        for &v in &sticks {
            weights.push(v * remainder);
            remainder *= 1.0 - v;
        }
        StickBreakingDraw {
            sticks,
            weights,
            atoms,
            remainder,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The truncated random measure, renormalized.
    pub fn to_measure(&self) -> Result<DiscreteMixingMeasure> {
        DiscreteMixingMeasure::new(self.atoms.clone(), self.weights.clone())
    }
}

/// Draws sticks until the unassigned mass drops to `trunc_tol`.
pub fn py_sample<R: Rng + ?Sized>(
    params: &PYParams,
    trunc_tol: f64,
    rng: &mut R,
) -> Result<StickBreakingDraw> {
    let PYParams { c, d, .. } = *params;
    if !(0.0..1.0).contains(&d) || !(c > -d) {
        return Err(Error::InvalidDiscount { c, d });
    }
    if !(trunc_tol > 0.0 && trunc_tol <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "truncation tolerance {trunc_tol} outside (0, 0.1]"
        )));
    }
    let mut sticks = Vec::new();
    let mut remainder = 1.0;
    while remainder > trunc_tol {
        if sticks.len() >= MAX_STICKS {
            return Err(Error::TruncationOverflow(MAX_STICKS));
        }
        let v = params.stick_law(sticks.len() + 1).sample(rng);
        remainder *= 1.0 - v;
        sticks.push(v);
    }
    let atoms = (0..sticks.len()).map(|_| params.base.sample(rng)).collect();
    Ok(StickBreakingDraw::from_sticks(sticks, atoms))
}

/// Stick fractions `v_j = p_j / Π_{h<j}(1 − v_h)` that reproduce the given
/// weights; the last one is always 1 when the weights sum to one.
pub fn stick_fractions(weights: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(weights.len());
    let mut remainder = 1.0;
    for &p in weights {
        let v = if remainder > 0.0 { (p / remainder).min(1.0) } else { 1.0 };
        out.push(v);
        remainder *= 1.0 - v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn weights_telescope() {
        let mut rng = seeded(7);
        let p = PYParams::new(1.0, 0.25, BaseMeasure::standard_normal()).unwrap();
        for _ in 0..200 {
            let draw = py_sample(&p, 1e-6, &mut rng).unwrap();
            let total: f64 = draw.weights.iter().sum::<f64>() + draw.remainder;
            assert!((total - 1.0).abs() < 1e-12);
            assert!(draw.remainder <= 1e-6);
            assert_eq!(draw.weights[0], draw.sticks[0]);
        }
    }

    #[test]
    fn rejects_bad_discount() {
        assert!(PYParams::new(1.0, 1.0, BaseMeasure::standard_normal()).is_err());
        assert!(PYParams::new(-0.5, 0.25, BaseMeasure::standard_normal()).is_err());
        let p = PYParams {
            c: 1.0,
            d: 0.0,
            base: BaseMeasure::standard_normal(),
        };
        assert!(py_sample(&p, 0.5, &mut seeded(1)).is_err());
    }

    #[test]
    fn fractions_invert_weights() {
        let w = [0.5, 0.25, 0.125, 0.125];
        let v = stick_fractions(&w);
        let back = StickBreakingDraw::from_sticks(v.clone(), vec![0.0; 4]);
        for (a, b) in back.weights.iter().zip(&w) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(v[3], 1.0);
    }
}
