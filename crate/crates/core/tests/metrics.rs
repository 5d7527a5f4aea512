use mixdens::kernels::{Family, KernelSpec};
use mixdens::measure::DiscreteMixingMeasure;
use mixdens::metrics::{
    hellinger, interpolation_checks, kl_divergence, lower_bound_check, scale_l1_check,
    translation_l1_check, wasserstein, InterpolationParams,
};
use mixdens::rng::seeded;
use mixdens::{Grid, GridFunction};
use proptest::prelude::*;
use rand::Rng;

/// Exhaustive search over the one-parameter family of 2×2 couplings.
fn brute_force_w(a: [f64; 2], wa: [f64; 2], b: [f64; 2], wb: [f64; 2], p: f64) -> f64 {
    let lo = (wa[0] + wb[0] - 1.0).max(0.0);
    let hi = wa[0].min(wb[0]);
    let cost = |g: f64| {
        let plan = [[g, wa[0] - g], [wb[0] - g, 1.0 - wa[0] - wb[0] + g]];
        let mut c = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                c += plan[i][j].max(0.0) * (a[i] - b[j]).abs().powf(p);
            }
        }
        c
    };
    // the cost is linear in g, so the endpoints carry the minimum; the
    // interior grid guards against a sign slip in that argument
    let steps = 1000;
    let best = (0..=steps)
        .map(|k| cost(lo + (hi - lo) * k as f64 / steps as f64))
        .fold(f64::INFINITY, f64::min);
    best.powf(1.0 / p)
}

fn measure(atoms: Vec<f64>, weights: Vec<f64>) -> DiscreteMixingMeasure {
    DiscreteMixingMeasure::new(atoms, weights).unwrap()
}

#[test]
fn two_point_example() {
    let f1 = measure(vec![0.0, 1.0], vec![0.5, 0.5]);
    let f2 = measure(vec![0.0, 2.0], vec![0.5, 0.5]);
    let w = wasserstein(&f1, &f2, 2.0);
    let oracle = brute_force_w([0.0, 1.0], [0.5, 0.5], [0.0, 2.0], [0.5, 0.5], 2.0);
    assert!((w - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((w - oracle).abs() < 1e-12);
}

#[test]
fn random_two_atom_couplings_match_brute_force() {
    let mut rng = seeded(31);
    for _ in 0..200 {
        let mut a = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let mut b = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let wa0: f64 = rng.random_range(0.05..0.95);
        let wb0: f64 = rng.random_range(0.05..0.95);
        let p = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let w = wasserstein(
            &measure(a.to_vec(), vec![wa0, 1.0 - wa0]),
            &measure(b.to_vec(), vec![wb0, 1.0 - wb0]),
            p,
        );
        let oracle = brute_force_w(a, [wa0, 1.0 - wa0], b, [wb0, 1.0 - wb0], p);
        assert!((w - oracle).abs() < 1e-9, "{w} vs {oracle}");
    }
}

fn arb_measure() -> impl Strategy<Value = DiscreteMixingMeasure> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..8).prop_map(|pairs| {
        let (atoms, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        DiscreteMixingMeasure::new(atoms, weights).unwrap()
    })
}

proptest! {
    #[test]
    fn wasserstein_is_a_metric(a in arb_measure(), b in arb_measure(), c in arb_measure(), p in 1.0f64..4.0) {
        let ab = wasserstein(&a, &b, p);
        let ba = wasserstein(&b, &a, p);
        let bc = wasserstein(&b, &c, p);
        let ac = wasserstein(&a, &c, p);
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(wasserstein(&a, &a, p) <= 1e-12);
        let lo = a.min_atom().min(b.min_atom());
        let hi = a.max_atom().max(b.max_atom());
        prop_assert!(ab <= hi - lo + 1e-12);
    }

    #[test]
    fn wasserstein_nondecreasing_in_p(a in arb_measure(), b in arb_measure()) {
        let w1 = wasserstein(&a, &b, 1.0);
        let w2 = wasserstein(&a, &b, 2.0);
        let w4 = wasserstein(&a, &b, 4.0);
        prop_assert!(w1 <= w2 + 1e-9 && w2 <= w4 + 1e-9);
    }
}

fn random_mixture_density<R: Rng>(rng: &mut R, grid: Grid) -> GridFunction {
    let k = rng.random_range(1..=4);
    let atoms: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let sigma = rng.random_range(0.8..1.5);
    measure(atoms, weights).gaussian_mixture_direct(sigma, grid).unwrap()
}

#[test]
fn pinsker_on_random_pairs() {
    let grid = Grid::new(20.0, 4096).unwrap();
    let mut rng = seeded(32);
    for _ in 0..100 {
        let f0 = random_mixture_density(&mut rng, grid);
        let f = random_mixture_density(&mut rng, grid);
        let kl = kl_divergence(&f0, &f).unwrap().value;
        let l1 = f0.lp_distance(&f, 1.0).unwrap();
        assert!(kl >= 0.5 * l1 * l1 - 1e-12, "KL {kl} vs l1 {l1}");
        // Hellinger sits between the L¹ bounds h² ≤ ∥f−g∥₁ ≤ 2h
        let h = hellinger(&f0, &f).unwrap();
        assert!(h * h <= l1 + 1e-12 && l1 <= 2.0 * h + 1e-12);
    }
}

#[test]
fn interpolation_normal_vs_cauchy() {
    let grid = Grid::new(40.0, 1 << 14).unwrap();
    let phi = KernelSpec::gaussian(1.0).grid(grid).unwrap();
    let cauchy = KernelSpec::new(Family::Cauchy, 1.0).unwrap().grid(grid).unwrap();
    let r = interpolation_checks(&phi, &cauchy, &InterpolationParams::default()).unwrap();
    for (name, q) in [("holder", r.holder), ("l1_to_sup", r.l1_to_sup), ("p_norm_max", r.p_norm_max)] {
        assert!(q.margin() >= 0.0, "{name}: {q:?}");
    }
    let same = interpolation_checks(&phi, &phi, &InterpolationParams::default()).unwrap();
    assert!(same.all_hold(0.0));
    assert_eq!(same.p_norm_max.lhs, 0.0);
}

#[test]
fn interpolation_on_random_mixtures() {
    let grid = Grid::new(20.0, 4096).unwrap();
    let mut rng = seeded(33);
    for _ in 0..50 {
        let f = random_mixture_density(&mut rng, grid);
        let g = random_mixture_density(&mut rng, grid);
        let params = InterpolationParams {
            upsilon: rng.random_range(0.2..1.0),
            u: rng.random_range(0.25..2.0),
            p: rng.random_range(1.0..1.9),
            t: rng.random_range(1.5..4.0),
        };
        let r = interpolation_checks(&f, &g, &params).unwrap();
        assert!(r.all_hold(1e-9), "{params:?}: {r:?}");
    }
}

#[test]
fn translation_and_scale_perturbations() {
    let grid = Grid::new(40.0, 1 << 15).unwrap();
    let mut rng = seeded(34);
    for id in ["gaussian:1", "cauchy:1", "stable:1.5:1"] {
        let base: KernelSpec = id.parse().unwrap();
        for _ in 0..20 {
            let sigma = rng.random_range(0.3..2.0);
            let k = base.with_scale(sigma);
            let q = translation_l1_check(&k, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), grid).unwrap();
            assert!(q.holds(1e-6), "{id} translation {q:?}");
            let f = measure(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], vec![0.3, 0.7]);
            let (mix, ker) = scale_l1_check(&f, &base, sigma, rng.random_range(0.3..2.0), grid).unwrap();
            assert!(mix.holds(1e-6) && ker.holds(1e-6), "{id} scale {mix:?} {ker:?}");
        }
    }
    let fvp: KernelSpec = "fvp:1".parse().unwrap();
    let f = DiscreteMixingMeasure::dirac(0.0);
    assert!(scale_l1_check(&f, &fvp, 1.0, 1.1, grid).is_err());
}

#[test]
fn convolution_floor_holds_below_tau() {
    let grid = Grid::new(20.0, 4096).unwrap();
    // standard normal profile: increasing left of −1, decreasing right of 1
    let f = KernelSpec::gaussian(1.0).grid(grid).unwrap();
    for sigma in [0.05, 0.1, 0.2, 0.4] {
        let k = KernelSpec::gaussian(sigma);
        let q = lower_bound_check(&f, -1.0, 1.0, &k, 0.45).unwrap();
        assert!(q.holds(1e-9), "sigma {sigma}: {q:?}");
    }
    assert!(lower_bound_check(&f, -1.0, 1.0, &KernelSpec::gaussian(5.0), 0.45).is_err());
}
