use std::fs;
use std::path::PathBuf;

use clap::Args;
use mixdens::discretize::{discretize_with_fallback, support_budget};
use mixdens::kernels::{sinc_approx_error, superkernel_approx_error, Family, KernelSpec};
use mixdens::measure::DiscreteMixingMeasure;
use mixdens::posterior::{
    blocked_gibbs_fit, contraction_experiment, contraction_slope, experiment_grid, median_by_n,
    pooled_rank_correlation, posterior_mean_density, wasserstein_recovery_experiment, FitConfig, MixingPrior, Truth,
};
use mixdens::priors::bounds::{prior_mass_suite, Lemma, SuiteConfig};
use mixdens::priors::nig::{nig2_cdf_deviation, nig_simplex_integral};
use mixdens::priors::{BaseFamily, BaseMeasure, NIGParams, PYParams, ScalePriorA0};
use mixdens::rng::{seeded, stream};
use mixdens::transforms::{
    default_delta, make_nonnegative, smoothed_sup_error, spectral_symbol_check, transform_analytic,
};
use mixdens::Grid;

use crate::output::{Run, Table};
use crate::{CliError, Common};

type Echo = Vec<(String, String)>;

fn real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    match t {
        "inf" | "infinity" | "Inf" => Ok(f64::INFINITY),
        _ => t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")),
    }
}

fn count(s: &str) -> Result<usize, String> {
    let t = s.trim();
    // accept 1e6-style budgets
    if let Ok(n) = t.parse::<usize>() {
        return Ok(n);
    }
    match t.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(format!("`{t}` is not a non-negative integer")),
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{flag}: {msg}"))
}

fn positive(flag: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        Some(x) => Err(usage(flag, format!("{x} is not a positive number"))),
        None if xs.is_empty() => Err(usage(flag, "empty list")),
        None => Ok(()),
    }
}

fn increasing(flag: &str, xs: &[usize]) -> Result<(), CliError> {
    if xs.is_empty() || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(flag, "must be a non-empty increasing list"));
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Half-width X of the grid [−X, X).
    #[arg(long, default_value_t = 40.0, value_parser = real)]
    pub half_width: f64,
    /// Number of grid points (a power of two is fastest).
    #[arg(long, default_value_t = 16384, value_parser = count)]
    pub points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.half_width, self.points).map_err(CliError::flag("points"))
    }
}

fn catalog(flag: &str, id: &str, grid: Grid) -> Result<(KernelSpec, mixdens::GridFunction), CliError> {
    let spec: KernelSpec = id.parse().map_err(CliError::flag(flag))?;
    let f = spec.grid(grid).map_err(CliError::flag(flag))?;
    Ok((spec, f))
}

#[derive(Args, Debug, Clone)]
pub struct ApproxArgs {
    /// Catalog density id, e.g. `gaussian:1`, `cauchy:1`, `fvp`.
    #[arg(long)]
    pub density: String,
    /// Comma-separated bandwidths.
    #[arg(long, value_delimiter = ',', value_parser = real, required = true)]
    pub sigma: Vec<f64>,
    /// Norm exponent (`inf` for the sup norm).
    #[arg(long, default_value = "inf", value_parser = real)]
    pub p: f64,
    /// `sinc` or `superkernel`.
    #[arg(long, default_value = "sinc")]
    pub smoother: String,
    /// Flat part of the superkernel spectrum.
    #[arg(long, default_value_t = 1.0, value_parser = real)]
    pub flat: f64,
    /// Cutoff of the superkernel spectrum.
    #[arg(long, default_value_t = 2.0, value_parser = real)]
    pub cutoff: f64,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn approx(a: &ApproxArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let grid = a.grid.grid()?;
    let (spec, f) = catalog("density", &a.density, grid)?;
    positive("sigma", &a.sigma)?;
    let superkernel = match a.smoother.as_str() {
        "sinc" => false,
        "superkernel" => {
            KernelSpec::new(Family::Superkernel { flat: a.flat, cutoff: a.cutoff }, 1.0)
                .map_err(CliError::flag("cutoff"))?;
            true
        }
        other => return Err(usage("smoother", format!("unknown smoother `{other}`"))),
    };
    let min_p = if superkernel { 1.0 } else { 2.0 };
    if a.p.is_nan() || a.p < min_p {
        return Err(usage("p", format!("{} is below {min_p}", a.p)));
    }
    let reach = if superkernel { a.cutoff } else { 1.0 };
    for &s in &a.sigma {
        if reach / s > grid.nyquist() {
            return Err(usage("sigma", format!("cutoff {} exceeds the grid's Nyquist frequency {}", reach / s, grid.nyquist())));
        }
    }
    let mut t = Table::new(&["density", "smoother", "sigma", "p", "error"]);
    for &s in &a.sigma {
        let err = if superkernel {
            superkernel_approx_error(&f, s, a.p, a.flat, a.cutoff)
        } else {
            sinc_approx_error(&f, s, a.p)
        }
        .map_err(CliError::runtime)?;
        t.push(vec![spec.to_string().into(), a.smoother.clone().into(), s.into(), a.p.into(), err.into()]);
    }
    let mut run = Run::new(&common.out, "approx", echo);
    run.table("", t);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct TransformArgs {
    /// Catalog density id of f₀.
    #[arg(long, default_value = "gaussian:1")]
    pub density: String,
    #[arg(long, value_delimiter = ',', value_parser = real, required = true)]
    pub sigma: Vec<f64>,
    /// Series truncation order J, 0 for automatic.
    #[arg(long, default_value_t = 0, value_parser = count)]
    pub order: usize,
    /// Floor fraction δ of the non-negative correction.
    #[arg(long, value_parser = real)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn transform(a: &TransformArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let grid = a.grid.grid()?;
    let (_, f0) = catalog("density", &a.density, grid)?;
    positive("sigma", &a.sigma)?;
    let delta = a.delta.unwrap_or_else(default_delta);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(usage("delta", format!("{delta} is outside (0, 1)")));
    }
    if a.order == 1 || a.order > 120 {
        return Err(usage("order", "must be 0 (automatic) or between 2 and 120"));
    }
    let order = (a.order > 0).then_some(a.order);
    let mut t = Table::new(&[
        "sigma",
        "order",
        "sup_error",
        "mass_defect",
        "transform_mass_defect",
        "replaced_points",
        "identity_deviation",
    ]);
    for &s in &a.sigma {
        let r = transform_analytic(&f0, s, order).map_err(CliError::flag("sigma"))?;
        let sup = smoothed_sup_error(&r, &f0).map_err(CliError::runtime)?;
        let nn = make_nonnegative(&r, &f0, delta).map_err(CliError::runtime)?;
        let ident = spectral_symbol_check(r.truncation_order, 0.5);
        t.push(vec![
            s.into(),
            r.truncation_order.into(),
            sup.into(),
            (nn.mass - 1.0).abs().into(),
            r.mass_defect.into(),
            nn.replaced.into(),
            ident.into(),
        ]);
    }
    let mut run = Run::new(&common.out, "transform", echo);
    run.note("delta", delta);
    run.table("", t);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct DiscretizeArgs {
    /// Mixing measure: `uniform` or a catalog density id, restricted to [−a, a].
    #[arg(long, default_value = "uniform")]
    pub mixing: String,
    /// CSV of `atom,weight` rows; overrides --mixing.
    #[arg(long)]
    pub atoms_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3, value_parser = real)]
    pub epsilon: f64,
    /// Half-width of the support [−a, a].
    #[arg(long, default_value_t = 2.0, value_parser = real)]
    pub a: f64,
    #[arg(long, default_value_t = 0.5, value_parser = real)]
    pub sigma: f64,
    /// Kernel family id; its scale is replaced by --sigma.
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn read_atoms(path: &PathBuf) -> Result<DiscreteMixingMeasure, CliError> {
    let flag = CliError::flag("atoms-csv");
    let text = fs::read_to_string(path).map_err(|e| usage("atoms-csv", format!("{}: {e}", path.display())))?;
    let (mut atoms, mut weights) = (Vec::new(), Vec::new());
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let parsed = (parts.len() == 2).then(|| (real(parts[0]), real(parts[1])));
        match parsed {
            Some((Ok(x), Ok(w))) => {
                atoms.push(x);
                weights.push(w);
            }
            // a header row
            _ if no == 0 => {}
            _ => return Err(usage("atoms-csv", format!("line {} is not `atom,weight`", no + 1))),
        }
    }
    DiscreteMixingMeasure::new(atoms, weights).map_err(flag)
}

pub fn discretize(a: &DiscretizeArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let grid = a.grid.grid()?;
    positive("a", &[a.a])?;
    positive("sigma", &[a.sigma])?;
    let base: KernelSpec = a.kernel.parse().map_err(CliError::flag("kernel"))?;
    let kernel = base.with_scale(a.sigma);
    let f = match &a.atoms_csv {
        Some(p) => read_atoms(p)?,
        None if a.mixing == "uniform" => DiscreteMixingMeasure::from_density_panels(|_| 1.0, -a.a, a.a, 16, 20)
            .map_err(CliError::flag("a"))?,
        None => {
            let spec: KernelSpec = a.mixing.parse().map_err(CliError::flag("mixing"))?;
            DiscreteMixingMeasure::from_density_panels(|x| spec.density(x).unwrap_or(0.0), -a.a, a.a, 16, 20)
                .map_err(CliError::flag("mixing"))?
        }
    };
    if f.min_atom() < -a.a || f.max_atom() > a.a {
        return Err(usage("a", format!("atoms span [{}, {}]", f.min_atom(), f.max_atom())));
    }
    let budget = support_budget(a.epsilon, a.a, a.sigma, &kernel).map_err(CliError::flag("epsilon"))?;
    let out = discretize_with_fallback(&f, budget.n, (-a.a, a.a)).map_err(CliError::runtime)?;
    let before = f.mixture_density(&kernel, grid).map_err(CliError::flag("sigma"))?;
    let after = out.measure.mixture_density(&kernel, grid).map_err(CliError::runtime)?;
    let sup = before.sup_distance(&after).map_err(CliError::runtime)?;

    let mut atoms = Table::new(&["atom", "weight"]);
    for (x, w) in out.measure.atoms().iter().zip(out.measure.weights()) {
        atoms.push(vec![(*x).into(), (*w).into()]);
    }
    let mut diag = Table::new(&[
        "kernel", "epsilon", "a", "sigma", "regime", "budget", "atoms", "cells", "sup_error", "target",
    ]);
    diag.push(vec![
        kernel.to_string().into(),
        a.epsilon.into(),
        a.a.into(),
        a.sigma.into(),
        format!("{:?}", budget.regime).into(),
        budget.n.into(),
        out.measure.len().into(),
        out.cells.into(),
        sup.into(),
        (a.epsilon / a.sigma).into(),
    ]);
    let mut run = Run::new(&common.out, "discretize", echo);
    run.table("", atoms);
    run.table("diagnostics", diag);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct PriorMassArgs {
    /// `py-sticks`, `py-locations` or `nig`.
    #[arg(long)]
    pub lemma: String,
    /// Larger configurations: numbers of atoms.
    #[arg(long, value_delimiter = ',', value_parser = count)]
    pub test_n: Option<Vec<usize>>,
    /// Larger configurations: radii.
    #[arg(long, value_delimiter = ',', value_parser = real)]
    pub test_eps: Option<Vec<f64>>,
    /// Monte-Carlo draws per configuration.
    #[arg(long, value_parser = count)]
    pub draws: Option<usize>,
}

pub fn prior_mass(a: &PriorMassArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let lemma: Lemma = a.lemma.parse().map_err(CliError::flag("lemma"))?;
    let mut cfg = SuiteConfig::default_for(lemma);
    cfg.seed = common.seed;
    if let Some(n) = &a.test_n {
        if n.iter().any(|&k| k < 2) || n.is_empty() {
            return Err(usage("test-n", "needs at least two atoms per configuration"));
        }
        cfg.test_n = n.clone();
    }
    if let Some(e) = &a.test_eps {
        positive("test-eps", e)?;
        if e.iter().any(|&x| x >= 1.0) {
            return Err(usage("test-eps", "radii must lie in (0, 1)"));
        }
        cfg.test_eps = e.clone();
    }
    if let Some(d) = a.draws {
        if d < 100 {
            return Err(usage("draws", format!("{d} is below 100")));
        }
        cfg.draws = d;
    }
    let (consts, rows) = prior_mass_suite(lemma, &cfg).map_err(|e| match e {
        mixdens::Error::PreconditionViolated(_) => usage("test-eps", e),
        other => CliError::runtime(other),
    })?;
    let mut t = Table::new(&[
        "lemma",
        "n",
        "eps",
        "fitting",
        "rate",
        "mc_estimate",
        "mc_stderr",
        "log_bound",
        "analytic_bound",
        "holds",
    ]);
    for r in &rows {
        t.push(vec![
            a.lemma.clone().into(),
            r.n.into(),
            r.eps.into(),
            r.fitting.into(),
            r.rate.into(),
            r.mc.mean.into(),
            r.mc.se.into(),
            r.log_bound.into(),
            r.log_bound.exp().into(),
            r.holds.into(),
        ]);
    }
    let mut run = Run::new(&common.out, "prior-mass", echo);
    run.note("fitted.ln_c", consts.ln_c);
    run.note("fitted.c1", consts.c1);
    run.note("violations", rows.iter().filter(|r| !r.fitting && !r.holds).count());
    run.table("", t);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct NigCheckArgs {
    /// Parameters α_j, one per coordinate.
    #[arg(long, value_delimiter = ',', value_parser = real, required = true)]
    pub alphas: Vec<f64>,
    /// Uniform simplex points for the density integral.
    #[arg(long, default_value_t = 1_000_000, value_parser = count)]
    pub points: usize,
    /// Sampler draws for the moment and CDF checks.
    #[arg(long, default_value_t = 1_000_000, value_parser = count)]
    pub draws: usize,
}

pub fn nig_check(a: &NigCheckArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let params = NIGParams::new(a.alphas.clone()).map_err(CliError::flag("alphas"))?;
    if a.points < 2 {
        return Err(usage("points", "needs at least 2"));
    }
    if a.draws < 2 {
        return Err(usage("draws", "needs at least 2"));
    }
    let (integral, se) = nig_simplex_integral(&params, a.points, &mut stream(common.seed, 0)).map_err(CliError::runtime)?;
    let mut t = Table::new(&["statistic", "value"]);
    t.push(vec!["n".into(), params.len().into()]);
    t.push(vec!["simplex_integral".into(), integral.into()]);
    t.push(vec!["simplex_integral_se".into(), se.into()]);
    t.push(vec!["simplex_integral_deviation".into(), (integral - 1.0).abs().into()]);
    let mut rng = stream(common.seed, 1);
    let total = params.total();
    let mut sums = vec![0.0; params.len()];
    for _ in 0..a.draws {
        for (s, z) in sums.iter_mut().zip(mixdens::priors::nig_sample(&params, &mut rng)) {
            *s += z;
        }
    }
    for (j, (s, alpha)) in sums.iter().zip(params.alphas()).enumerate() {
        let dev = (s / a.draws as f64 - alpha / total).abs();
        t.push(vec![format!("mean_deviation_{}", j + 1).into(), dev.into()]);
    }
    if params.len() == 2 {
        let dev = nig2_cdf_deviation(&params, a.draws, 1000, &mut stream(common.seed, 2)).map_err(CliError::runtime)?;
        t.push(vec!["cdf_sup_deviation".into(), dev.into()]);
    }
    let mut run = Run::new(&common.out, "nig-check", echo);
    run.table("", t);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    /// `dp`, `py` or `nig`.
    #[arg(long, default_value = "dp")]
    pub prior: String,
    /// Total mass of the base measure (the DP/PY concentration).
    #[arg(long, default_value_t = 1.0, value_parser = real)]
    pub c: f64,
    /// Pitman-Yor discount.
    #[arg(long, default_value_t = 0.0, value_parser = real)]
    pub d: f64,
    #[arg(long, default_value_t = 0.0, value_parser = real)]
    pub base_mean: f64,
    #[arg(long, default_value_t = 2.0, value_parser = real)]
    pub base_sd: f64,
    /// Inverse-gamma scale prior: shape.
    #[arg(long, default_value_t = 2.0, value_parser = real)]
    pub ig_shape: f64,
    /// Inverse-gamma scale prior: scale.
    #[arg(long, default_value_t = 0.5, value_parser = real)]
    pub ig_scale: f64,
    /// Hold the kernel scale fixed instead of sampling it.
    #[arg(long, value_parser = real)]
    pub fixed_sigma: Option<f64>,
    /// Number of sticks (PY priors).
    #[arg(long, default_value_t = 50, value_parser = count)]
    pub truncation: usize,
    /// Partition cells on [−8, 8] (N-IG prior).
    #[arg(long, default_value_t = 64, value_parser = count)]
    pub cells: usize,
    #[arg(long, default_value_t = 2000, value_parser = count)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1000, value_parser = count)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 5, value_parser = count)]
    pub thin: usize,
    #[arg(long, default_value_t = 1e-4, value_parser = real)]
    pub remainder_tol: f64,
}

impl ChainArgs {
    fn config(&self, seed: u64, truncate: Option<(f64, f64)>) -> Result<FitConfig, CliError> {
        let base = BaseMeasure::new(
            BaseFamily::Normal {
                mean: self.base_mean,
                sd: self.base_sd,
                truncate,
            },
            self.c,
        )
        .map_err(CliError::flag("base-sd"))?;
        let prior = match self.prior.as_str() {
            "dp" => MixingPrior::PitmanYor(PYParams::dirichlet(base)),
            "py" => MixingPrior::PitmanYor(PYParams::new(self.c, self.d, base).map_err(CliError::flag("d"))?),
            "nig" => MixingPrior::NigPartition {
                base,
                cells: self.cells,
                lo: -8.0,
                hi: 8.0,
            },
            other => return Err(usage("prior", format!("unknown prior `{other}`"))),
        };
        let cfg = FitConfig {
            prior,
            scale_prior: ScalePriorA0::InverseGamma {
                nu: self.ig_shape,
                lambda: self.ig_scale,
            },
            fixed_sigma: self.fixed_sigma,
            truncation: self.truncation,
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
            remainder_tol: self.remainder_tol,
            likelihood: true,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Data file, one real per line.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub chain: ChainArgs,
}

fn read_data(path: &PathBuf) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage("data", format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match real(line) {
            Ok(x) if x.is_finite() => out.push(x),
            _ => return Err(usage("data", format!("line {} is not a finite number", no + 1))),
        }
    }
    if out.len() < 10 {
        return Err(usage("data", format!("{} observations, need at least 10", out.len())));
    }
    Ok(out)
}

pub fn fit(a: &FitArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let data = read_data(&a.data)?;
    let cfg = a.chain.config(common.seed, None)?;
    let fit = blocked_gibbs_fit(&data, &cfg, &mut seeded(common.seed)).map_err(CliError::runtime)?;
    let mut draws = Table::new(&["draw", "sigma", "loglik", "tail_mass", "atoms"]);
    let mut atoms = Table::new(&["draw", "atom", "weight"]);
    for (i, d) in fit.draws.iter().enumerate() {
        draws.push(vec![i.into(), d.sigma.into(), d.loglik.into(), d.tail_mass.into(), d.mixing.len().into()]);
        for (x, w) in d.mixing.atoms().iter().zip(d.mixing.weights()) {
            atoms.push(vec![i.into(), (*x).into(), (*w).into()]);
        }
    }
    let mut run = Run::new(&common.out, "fit", echo);
    run.note("observations", data.len());
    for (k, w) in fit.warnings.iter().enumerate() {
        eprintln!("warning: {w:?}");
        run.note(&format!("warning.{k}"), format!("{w:?}"));
    }
    match posterior_mean_density(&fit.draws, experiment_grid()) {
        Ok(f) => {
            let mut dens = Table::new(&["x", "density"]);
            for (x, v) in f.grid().points().zip(f.values()) {
                dens.push(vec![x.into(), (*v).into()]);
            }
            run.table("density", dens);
        }
        Err(e) => return Err(usage("iterations", e)),
    }
    run.table("draws", draws);
    run.table("atoms", atoms);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct ContractArgs {
    /// `normal` (φ₁) or `two-point` (½δ₋₁ + ½δ₁ smoothed by φ₁).
    #[arg(long, default_value = "normal")]
    pub truth: String,
    #[arg(long, value_delimiter = ',', value_parser = count, default_value = "250,1000,4000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 10, value_parser = count)]
    pub replicates: usize,
    #[command(flatten)]
    pub chain: ChainArgs,
}

pub fn contract(a: &ContractArgs, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let truth: Truth = a.truth.parse().map_err(CliError::flag("truth"))?;
    increasing("ns", &a.ns)?;
    if a.ns[0] < 10 {
        return Err(usage("ns", "sample sizes start at 10"));
    }
    if a.replicates == 0 {
        return Err(usage("replicates", "needs at least one"));
    }
    let cfg = a.chain.config(common.seed, None)?;
    let rows = contraction_experiment(&truth, &cfg, &a.ns, a.replicates).map_err(CliError::runtime)?;
    let mut t = Table::new(&["n", "replicate", "l1", "l2", "sup", "w2", "kl"]);
    for r in &rows {
        t.push(vec![r.n.into(), r.replicate.into(), r.l1.into(), r.l2.into(), r.sup.into(), r.w2.into(), r.kl.into()]);
    }
    let mut summary = Table::new(&["n", "median_l1", "median_l2", "median_sup", "median_w2", "median_kl"]);
    let cols = [
        median_by_n(&rows, |r| r.l1),
        median_by_n(&rows, |r| r.l2),
        median_by_n(&rows, |r| r.sup),
        median_by_n(&rows, |r| r.w2),
        median_by_n(&rows, |r| r.kl),
    ];
    for (i, &(n, _)) in cols[0].iter().enumerate() {
        let mut row = vec![n.into()];
        row.extend(cols.iter().map(|c| c[i].1.into()));
        summary.push(row);
    }
    let mut run = Run::new(&common.out, "contract", echo);
    if a.ns.len() >= 2 {
        run.note("l1_slope", contraction_slope(&rows));
    }
    run.table("", t);
    run.table("summary", summary);
    Ok(run)
}

#[derive(Args, Debug, Clone)]
pub struct W2Args {
    /// `two-point` (F₀ = ½δ₋₁ + ½δ₁) or `point` (F₀ = δ₀).
    #[arg(long, default_value = "two-point")]
    pub truth: String,
    #[arg(long, value_delimiter = ',', value_parser = count, default_value = "250,1000,4000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 10, value_parser = count)]
    pub replicates: usize,
    /// Compact parameter set Θ = [theta-lo, theta-hi] for the base.
    #[arg(long, default_value_t = -4.0, value_parser = real, allow_hyphen_values = true)]
    pub theta_lo: f64,
    #[arg(long, default_value_t = 4.0, value_parser = real, allow_hyphen_values = true)]
    pub theta_hi: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
}

pub fn w2(a: &W2Args, common: &Common, echo: Echo) -> Result<Run, CliError> {
    let f0 = match a.truth.as_str() {
        "two-point" => Truth::TwoPoint.mixing(),
        "point" | "normal" => Truth::StandardNormal.mixing(),
        other => return Err(usage("truth", format!("unknown truth `{other}`"))),
    };
    increasing("ns", &a.ns)?;
    if a.ns[0] < 10 {
        return Err(usage("ns", "sample sizes start at 10"));
    }
    if a.replicates == 0 {
        return Err(usage("replicates", "needs at least one"));
    }
    if !(a.theta_lo < a.theta_hi) || !a.theta_lo.is_finite() || !a.theta_hi.is_finite() {
        return Err(usage("theta-lo", "Θ must be a bounded non-empty interval"));
    }
    if f0.min_atom() < a.theta_lo || f0.max_atom() > a.theta_hi {
        return Err(usage("theta-lo", "Θ must contain the atoms of the truth"));
    }
    if a.chain.fixed_sigma.is_some_and(|s| s != 1.0) {
        return Err(usage("fixed-sigma", "the recovery experiment holds the scale at 1"));
    }
    let mut chain = a.chain.clone();
    chain.fixed_sigma = Some(1.0);
    if chain.prior == "nig" {
        return Err(usage("prior", "the recovery experiment uses a truncated DP or PY base"));
    }
    let cfg = chain.config(common.seed, Some((a.theta_lo, a.theta_hi)))?;
    let rows = wasserstein_recovery_experiment(&f0, &cfg, &a.ns, a.replicates).map_err(CliError::runtime)?;
    let mut t = Table::new(&["n", "replicate", "w2_median", "w2_max", "diameter", "l1_median", "rank_corr"]);
    for r in &rows {
        t.push(vec![
            r.n.into(),
            r.replicate.into(),
            r.w2_median.into(),
            r.w2_max.into(),
            r.diameter.into(),
            r.l1_median.into(),
            r.rank_corr.into(),
        ]);
    }
    let mut summary = Table::new(&["n", "median_w2", "max_w2", "median_rank_corr"]);
    for &n in &a.ns {
        let pick = |f: fn(&mixdens::posterior::RecoveryRow) -> f64| -> Vec<f64> {
            rows.iter().filter(|r| r.n == n).map(f).collect()
        };
        let med = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            let k = v.len();
            if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) }
        };
        let max = pick(|r| r.w2_max).into_iter().fold(0.0, f64::max);
        summary.push(vec![n.into(), med(pick(|r| r.w2_median)).into(), max.into(), med(pick(|r| r.rank_corr)).into()]);
    }
    let mut run = Run::new(&common.out, "w2", echo);
    run.note("pooled_rank_corr", pooled_rank_correlation(&rows));
    run.table("", t);
    run.table("summary", summary);
    Ok(run)
}
