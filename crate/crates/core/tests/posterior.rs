use mixdens::measure::DiscreteMixingMeasure;
use mixdens::posterior::{
    blocked_gibbs_fit, mixture_loglik, posterior_mean_density, wasserstein_recovery_experiment,
    experiment_grid, FitConfig, MixingPrior, NonConvergenceWarning, Truth, MIN_DRAWS,
};
use mixdens::priors::base::BaseFamily;
use mixdens::priors::{BaseMeasure, PYParams};
use mixdens::rng::seeded;
use mixdens::special::neumaier_sum;
use mixdens::{Error, GridFunction};
use statrs::distribution::{Beta, ContinuousCDF};

fn short(cfg: &mut FitConfig) {
    cfg.iterations = 1000;
    cfg.burn_in = 500;
    cfg.thin = 5;
}

fn phi1_data(n: usize, seed: u64) -> Vec<f64> {
    Truth::StandardNormal.sample(n, &mut seeded(seed))
}

#[test]
fn dp_fit_to_normal_data() {
    let data = phi1_data(500, 41);
    let cfg = FitConfig::dirichlet_default();
    let fit = blocked_gibbs_fit(&data, &cfg, &mut seeded(42)).unwrap();
    assert_eq!(fit.draws.len(), 200);
    assert_eq!(fit.burn_in_trace.len(), cfg.burn_in);
    let grid = experiment_grid();
    let f = posterior_mean_density(&fit.draws, grid).unwrap();
    let l1 = f.lp_distance(&Truth::StandardNormal.density(grid).unwrap(), 1.0).unwrap();
    assert!(l1 <= 0.08, "L1 {l1}");
    assert!((f.integral() - 1.0).abs() <= 1e-6);
    for d in &fit.draws {
        assert!(d.sigma > 0.0);
        assert!((neumaier_sum(d.mixing.weights().iter().copied()) - 1.0).abs() < 1e-12);
        // the forced last stick carries the truncation remainder
        assert!(d.tail_mass <= 1e-4, "{}", d.tail_mass);
        assert_eq!(d.sticks.len(), cfg.truncation);
        assert!((d.loglik - mixture_loglik(&d.mixing, d.sigma, &data)).abs() < 1e-9);
    }
    assert!(!fit
        .warnings
        .iter()
        .any(|w| matches!(w, NonConvergenceWarning::TruncationRemainder { .. })));
}

#[test]
fn prior_only_first_stick_is_beta() {
    let (c, d) = (1.5, 0.25);
    let p = PYParams::new(c, d, BaseMeasure::standard_normal()).unwrap();
    let mut cfg = FitConfig::dirichlet_default();
    cfg.prior = MixingPrior::PitmanYor(p);
    cfg.likelihood = false;
    cfg.iterations = 10_100;
    cfg.burn_in = 100;
    cfg.thin = 1;
    let fit = blocked_gibbs_fit(&[], &cfg, &mut seeded(43)).unwrap();
    let mut v: Vec<f64> = fit.draws.iter().map(|d| d.sticks[0]).collect();
    assert_eq!(v.len(), 10_000);
    v.sort_by(f64::total_cmp);
    let law = Beta::new(1.0 - d, c + d).unwrap();
    let n = v.len() as f64;
    let ks = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.628 / n.sqrt(), "KS {ks}");
}

#[test]
fn prior_only_nig_cell_masses() {
    // E F(A) = ᾱ(A) under the N-IG process
    let base = BaseMeasure::normal(0.0, 1.0, 2.0).unwrap();
    let mut cfg = FitConfig::dirichlet_default();
    cfg.prior = MixingPrior::nig(base);
    cfg.likelihood = false;
    cfg.iterations = 20_100;
    cfg.burn_in = 100;
    cfg.thin = 1;
    let fit = blocked_gibbs_fit(&[], &cfg, &mut seeded(44)).unwrap();
    let mass: Vec<f64> = fit
        .draws
        .iter()
        .map(|d| {
            d.mixing
                .atoms()
                .iter()
                .zip(d.mixing.weights())
                .filter(|(a, _)| **a > 0.0 && **a <= 1.0)
                .map(|(_, w)| w)
                .sum()
        })
        .collect();
    let n = mass.len() as f64;
    let m = mass.iter().sum::<f64>() / n;
    let se = (mass.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let want = base.interval_mass(0.0, 1.0);
    // the cell boundaries of [−8, 8] into 64 cells include 0 and 1
    assert!((m - want).abs() <= 3.0 * se, "{m} vs {want} (se {se})");
}

#[test]
fn nig_partition_fit_tracks_the_truth() {
    let data = phi1_data(500, 45);
    let mut cfg = FitConfig::dirichlet_default();
    cfg.prior = MixingPrior::nig(BaseMeasure::normal(0.0, 2.0, 1.0).unwrap());
    short(&mut cfg);
    let fit = blocked_gibbs_fit(&data, &cfg, &mut seeded(46)).unwrap();
    let grid = experiment_grid();
    let f = posterior_mean_density(&fit.draws, grid).unwrap();
    let l1 = f.lp_distance(&Truth::StandardNormal.density(grid).unwrap(), 1.0).unwrap();
    assert!(l1 <= 0.1, "L1 {l1}");
    assert!(fit.draws.iter().all(|d| d.sticks.is_empty() && d.tail_mass == 0.0));
}

#[test]
fn laplace_base_runs() {
    let data = Truth::TwoPoint.sample(300, &mut seeded(47));
    let mut cfg = FitConfig::dirichlet_default();
    cfg.prior = MixingPrior::PitmanYor(PYParams::new(1.0, 0.3, BaseMeasure::laplace(0.0, 1.0, 1.0).unwrap()).unwrap());
    short(&mut cfg);
    let fit = blocked_gibbs_fit(&data, &cfg, &mut seeded(48)).unwrap();
    let grid = experiment_grid();
    let f = posterior_mean_density(&fit.draws, grid).unwrap();
    let l1 = f.lp_distance(&Truth::TwoPoint.density(grid).unwrap(), 1.0).unwrap();
    assert!(l1 <= 0.15, "L1 {l1}");
}

#[test]
fn label_permutation_leaves_predictive_unchanged() {
    let data = phi1_data(50, 49);
    let atoms = vec![-1.3, 0.2, 0.7, 2.5];
    let weights = vec![0.1, 0.4, 0.3, 0.2];
    let a = DiscreteMixingMeasure::new(atoms.clone(), weights.clone()).unwrap();
    let grid = experiment_grid();
    let fa = a.gaussian_mixture_direct(0.8, grid).unwrap();
    for perm in [[3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]] {
        let b = DiscreteMixingMeasure::new(
            perm.iter().map(|&i| atoms[i]).collect(),
            perm.iter().map(|&i| weights[i]).collect(),
        )
        .unwrap();
        assert_eq!(fa.values(), b.gaussian_mixture_direct(0.8, grid).unwrap().values());
        assert_eq!(mixture_loglik(&a, 0.8, &data), mixture_loglik(&b, 0.8, &data));
    }
}

#[test]
fn mean_density_matches_naive_average() {
    let data = phi1_data(200, 50);
    let mut cfg = FitConfig::dirichlet_default();
    short(&mut cfg);
    cfg.thin = 2;
    let fit = blocked_gibbs_fit(&data, &cfg, &mut seeded(51)).unwrap();
    let grid = experiment_grid();
    let streamed = posterior_mean_density(&fit.draws, grid).unwrap();
    let dens: Vec<GridFunction> = fit
        .draws
        .iter()
        .map(|d| d.mixing.gaussian_mixture_direct(d.sigma, grid).unwrap())
        .collect();
    let k = dens.len() as f64;
    for i in 0..grid.len() {
        let naive = neumaier_sum(dens.iter().map(|f| f.values()[i])) / k;
        assert!((streamed.values()[i] - naive).abs() <= 1e-12);
    }
    // identity on a repeated single draw
    let one = vec![fit.draws[0].clone(); MIN_DRAWS];
    let f = posterior_mean_density(&one, grid).unwrap();
    assert!(f.sup_distance(&dens[0]).unwrap() <= 1e-15);
}

#[test]
fn too_few_draws() {
    let d = mixdens::posterior::PosteriorDraw {
        mixing: DiscreteMixingMeasure::dirac(0.0),
        sigma: 1.0,
        loglik: 0.0,
        sticks: vec![],
        tail_mass: 0.0,
    };
    let r = posterior_mean_density(&vec![d; MIN_DRAWS - 1], experiment_grid());
    assert!(matches!(r, Err(Error::TooFewDraws { need: 50, got: 49 })));
}

#[test]
fn invalid_inputs() {
    let cfg = FitConfig::dirichlet_default();
    let r = blocked_gibbs_fit(&[0.0; 9], &cfg, &mut seeded(1));
    assert!(matches!(r, Err(Error::InvalidConfig(_))));
    let mut bad = cfg.clone();
    bad.truncation = 9;
    assert!(matches!(blocked_gibbs_fit(&[0.0; 20], &bad, &mut seeded(1)), Err(Error::InvalidConfig(_))));
    let mut nan = vec![0.0; 20];
    nan[3] = f64::NAN;
    assert!(blocked_gibbs_fit(&nan, &cfg, &mut seeded(1)).is_err());
}

#[test]
fn chain_is_deterministic() {
    let data = phi1_data(100, 52);
    let mut cfg = FitConfig::dirichlet_default();
    short(&mut cfg);
    let a = blocked_gibbs_fit(&data, &cfg, &mut seeded(53)).unwrap();
    let b = blocked_gibbs_fit(&data, &cfg, &mut seeded(53)).unwrap();
    assert_eq!(a.draws, b.draws);
    let c = blocked_gibbs_fit(&data, &cfg, &mut seeded(54)).unwrap();
    assert_ne!(a.draws, c.draws);
}

#[test]
fn posterior_beats_prior_predictive() {
    let grid = experiment_grid();
    let f0 = Truth::TwoPoint.density(grid).unwrap();
    let mut post = Vec::new();
    let mut prior = Vec::new();
    for r in 0..3 {
        let data = Truth::TwoPoint.sample(200, &mut seeded(60 + r));
        let mut cfg = FitConfig::dirichlet_default();
        short(&mut cfg);
        let fit = blocked_gibbs_fit(&data, &cfg, &mut seeded(70 + r)).unwrap();
        post.push(posterior_mean_density(&fit.draws, grid).unwrap().lp_distance(&f0, 1.0).unwrap());
        cfg.likelihood = false;
        let pr = blocked_gibbs_fit(&data, &cfg, &mut seeded(80 + r)).unwrap();
        prior.push(posterior_mean_density(&pr.draws, grid).unwrap().lp_distance(&f0, 1.0).unwrap());
    }
    post.sort_by(f64::total_cmp);
    prior.sort_by(f64::total_cmp);
    assert!(post[1] <= prior[1], "{post:?} vs {prior:?}");
}

fn compact_fixed_scale() -> FitConfig {
    let mut cfg = FitConfig::dirichlet_default();
    cfg.fixed_sigma = Some(1.0);
    let base = BaseMeasure::new(
        BaseFamily::Normal {
            mean: 0.0,
            sd: 2.0,
            truncate: Some((-4.0, 4.0)),
        },
        1.0,
    )
    .unwrap();
    cfg.prior = MixingPrior::PitmanYor(PYParams::dirichlet(base));
    cfg
}

#[test]
fn point_mass_truth_concentrates() {
    let cfg = compact_fixed_scale();
    let rows = wasserstein_recovery_experiment(&DiscreteMixingMeasure::dirac(0.0), &cfg, &[250, 4000], 3).unwrap();
    let med = |n: usize| {
        let mut v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.w2_median).collect();
        v.sort_by(f64::total_cmp);
        v[1]
    };
    assert!(rows.iter().all(|r| r.w2_max <= r.diameter));
    assert!(med(4000) < med(250), "{rows:?}");
    assert!(med(4000) <= 0.25, "{rows:?}");
}

#[test]
fn recovery_preconditions() {
    let f0 = DiscreteMixingMeasure::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
    let free = FitConfig::dirichlet_default();
    assert!(wasserstein_recovery_experiment(&f0, &free, &[100], 1).is_err());
    let mut untruncated = free.clone();
    untruncated.fixed_sigma = Some(1.0);
    assert!(wasserstein_recovery_experiment(&f0, &untruncated, &[100], 1).is_err());
    let outside = DiscreteMixingMeasure::dirac(5.0);
    assert!(wasserstein_recovery_experiment(&outside, &compact_fixed_scale(), &[100], 1).is_err());
    assert!(wasserstein_recovery_experiment(&f0, &compact_fixed_scale(), &[200, 100], 1).is_err());
}
