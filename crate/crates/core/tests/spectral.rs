use mixdens::kernels::{Family, KernelSpec};
use mixdens::transforms::{
    coefficients, default_delta, make_nonnegative, smoothed_sup_error, transform_analytic, TransformResult,
};
use mixdens::{Grid, GridFunction};
use proptest::prelude::*;

fn small() -> Grid {
    Grid::new(20.0, 1024).unwrap()
}

/// Gaussian mixture with components wide enough to be band-limited on `small()`.
fn mixture() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec((-3.0..3.0f64, 0.5..1.5f64, 0.1..1.0f64), 1..4).prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let mut acc = GridFunction::from_fn(small(), |_| 0.0);
        for (mu, s, w) in parts {
            let k = KernelSpec::gaussian(s).grid(small()).unwrap().translate(mu);
            acc = acc.add(&k.scale(w / total)).unwrap();
        }
        acc
    })
}

fn rel(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sup_distance(b).unwrap() / a.sup_norm().max(b.sup_norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_commutes_and_associates(f in mixture(), g in mixture(), h in mixture()) {
        let fg = f.convolve(&g).unwrap();
        prop_assert!(rel(&fg, &g.convolve(&f).unwrap()) <= 1e-10);
        let left = fg.convolve(&h).unwrap();
        let right = f.convolve(&g.convolve(&h).unwrap()).unwrap();
        prop_assert!(rel(&left, &right) <= 1e-10);
    }

    #[test]
    fn derivative_passes_through_convolution(f in mixture(), g in mixture(), j in 1u32..5) {
        let a = f.convolve(&g).unwrap().spectral_derivative(j).unwrap();
        let b = f.spectral_derivative(j).unwrap().convolve(&g).unwrap();
        prop_assert!(a.sup_distance(&b).unwrap() <= 1e-9 * a.sup_norm().max(1.0));
    }

    #[test]
    fn spectrum_round_trip(f in mixture()) {
        let back = GridFunction::from_spectrum(*f.grid(), f.spectrum().to_vec()).unwrap();
        prop_assert!(rel(&f, &back) <= 1e-12);
    }

    #[test]
    fn band_limit_is_idempotent(f in mixture(), cutoff in 0.2..10.0f64) {
        let once = f.band_limit(cutoff).unwrap();
        let twice = once.band_limit(cutoff).unwrap();
        prop_assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn coefficient_parity_and_absolute_sum(half in 20usize..60) {
        let j = 2 * half;
        let c = coefficients(j);
        prop_assert!((1..=j).step_by(2).all(|k| c.c[k] == 0.0 && c.d[k] == 0.0));
        let bound = (1f64.exp().sqrt() - 1.0) * 1f64.exp().sqrt();
        let mut partial = 0.0;
        for k in 1..=j {
            partial += c.d[k].abs();
            prop_assert!(partial <= bound);
        }
    }
}

#[test]
fn superkernel_is_strictly_below_one_off_the_flat_part() {
    let grid = Grid::default();
    let k = KernelSpec::new(Family::Superkernel { flat: 1.0, cutoff: 2.0 }, 1.0).unwrap();
    for t in grid.frequencies().filter(|t| t.abs() > 1.0) {
        assert!(k.fourier(t).unwrap().abs() < 1.0, "t = {t}");
    }
}

#[test]
fn supersmooth_envelope_holds_on_the_grid() {
    let grid = Grid::default();
    for spec in ["gaussian:1", "cauchy:1", "stable:1.5:1", "stable:0.8:1"] {
        let k: KernelSpec = spec.parse().unwrap();
        let (rho, r, _) = k.class_params();
        let f = k.grid(grid).unwrap();
        let env = |t: f64| (-(rho * t).powf(r)).exp();
        let at = |t: f64| f.spectrum()[(t / grid.frequency_step()).round() as usize].norm();
        let t2 = grid.frequency((2.0 / grid.frequency_step()).round() as usize);
        let c = at(t2) / env(t2);
        for (m, z) in f.spectrum().iter().enumerate() {
            let t = grid.frequency(m).abs();
            if t >= t2 {
                assert!(z.norm() <= c * env(t) * (1.0 + 1e-9) + 1e-14, "{spec} at t = {t}");
            }
        }
    }
}

#[test]
fn smoothed_error_shrinks_along_the_ladder() {
    let grid = Grid::default();
    for spec in ["gaussian:1", "cauchy:1"] {
        let f0 = spec.parse::<KernelSpec>().unwrap().grid(grid).unwrap();
        let errs: Vec<f64> = [0.6, 0.5, 0.4, 0.35, 0.3, 0.25]
            .iter()
            .map(|&s| smoothed_sup_error(&transform_analytic(&f0, s, None).unwrap(), &f0).unwrap())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{spec}: {errs:?}");
    }
}

#[test]
fn mass_defect_is_tiny_for_analytic_truths() {
    let grid = Grid::default();
    for spec in ["gaussian:1", "cauchy:1", "stable:1.5:1"] {
        let f0 = spec.parse::<KernelSpec>().unwrap().grid(grid).unwrap();
        for s in [0.3, 0.2, 0.1] {
            let t = transform_analytic(&f0, s, None).unwrap();
            assert!(t.mass_defect <= 1e-6, "{spec} sigma {s}: {}", t.mass_defect);
        }
    }
}

#[test]
fn nonnegative_version_keeps_mass_and_accuracy() {
    let grid = Grid::default();
    let f0 = KernelSpec::gaussian(1.0).grid(grid).unwrap();
    // The band cut leaves a spectral jump of size ~e^{-1/(2σ²)}; its sinc
    // ringing is what the floor rectifies, so the defect falls off at that rate.
    let mut prev = f64::INFINITY;
    for (sigma, cap) in [(0.3, 2e-3), (0.25, 1e-4), (0.2, 1e-5)] {
        let t = transform_analytic(&f0, sigma, None).unwrap();
        let nn = make_nonnegative(&t, &f0, default_delta()).unwrap();
        let defect = (nn.g.integral() - 1.0).abs();
        assert!(defect <= cap && defect < prev, "sigma {sigma}: defect {defect:e}");
        prev = defect;
        assert!(nn.g.values().iter().all(|v| *v >= 0.0));
        let h = TransformResult {
            t_sigma: nn.h.clone(),
            ..t.clone()
        };
        let base = smoothed_sup_error(&t, &f0).unwrap();
        assert!(smoothed_sup_error(&h, &f0).unwrap() <= 10.0 * base);
    }
}
