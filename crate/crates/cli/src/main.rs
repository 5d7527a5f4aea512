//! `mixdens`: batch experiments for kernel-mixture density estimation.
//!
//! Every subcommand writes CSV tables plus a `.meta` sidecar into `--out`.
//! Exit status is 0 on success, 2 on usage or validation errors and 1 when
//! a computation fails.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    /// Library error raised while checking the value of `flag`.
    pub fn flag(flag: &str) -> impl Fn(mixdens::Error) -> CliError + '_ {
        move |e| CliError::Usage(format!("--{flag}: {e}"))
    }

    pub fn runtime(e: mixdens::Error) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "mixdens", version, about = "Kernel-mixture density estimation experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Root seed; replicate r uses seed XOR r.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory; nothing is written elsewhere.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// File of key=value lines; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sinc or superkernel approximation error of a catalog density.
    #[command(allow_negative_numbers = true)]
    Approx(commands::ApproxArgs),
    /// Corrected-density transform diagnostics over a σ ladder.
    #[command(allow_negative_numbers = true)]
    Transform(commands::TransformArgs),
    /// Moment-matched discretization of a mixing measure.
    #[command(allow_negative_numbers = true)]
    Discretize(commands::DiscretizeArgs),
    /// Monte-Carlo check of the prior-mass lower bounds.
    #[command(allow_negative_numbers = true)]
    PriorMass(commands::PriorMassArgs),
    /// Normalized inverse-Gaussian law: density integral and sampler checks.
    #[command(allow_negative_numbers = true)]
    NigCheck(commands::NigCheckArgs),
    /// Posterior draws for a data file.
    #[command(allow_negative_numbers = true)]
    Fit(commands::FitArgs),
    /// Posterior contraction experiment.
    #[command(allow_negative_numbers = true)]
    Contract(commands::ContractArgs),
    /// Wasserstein recovery of the mixing measure.
    #[command(allow_negative_numbers = true)]
    W2(commands::W2Args),
}

/// Every resolved option of the subcommand, in declaration order.
fn echo(matches: &clap::ArgMatches) -> Vec<(String, String)> {
    let Some((name, sub)) = matches.subcommand() else {
        return Vec::new();
    };
    // argument ids only, not the groups derived from the Args structs
    let cmd = Cli::command();
    let args: Vec<String> = cmd
        .find_subcommand(name)
        .map(|c| c.get_arguments().map(|a| a.get_id().to_string()).collect())
        .unwrap_or_default();
    let globals: Vec<String> = cmd.get_arguments().map(|a| a.get_id().to_string()).collect();
    sub.ids()
        .filter(|id| args.iter().chain(&globals).any(|a| a == id.as_str()))
        .filter_map(|id| {
            let raw = sub.get_raw(id.as_str())?;
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().trim().to_string()).collect();
            Some((id.to_string(), vals.join(",")))
        })
        .collect()
}

fn run(args: Vec<String>) -> Result<(), CliError> {
    let args = config::merge(args)?;
    let matches = match Cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => e.exit(),
    };
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let echoed = echo(&matches);
    let common = cli.common;
    if common.threads > 1024 {
        return Err(CliError::Usage(format!("--threads: {} is more than 1024", common.threads)));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let run = match &cli.cmd {
        Cmd::Approx(a) => commands::approx(a, &common, echoed),
        Cmd::Transform(a) => commands::transform(a, &common, echoed),
        Cmd::Discretize(a) => commands::discretize(a, &common, echoed),
        Cmd::PriorMass(a) => commands::prior_mass(a, &common, echoed),
        Cmd::NigCheck(a) => commands::nig_check(a, &common, echoed),
        Cmd::Fit(a) => commands::fit(a, &common, echoed),
        Cmd::Contract(a) => commands::contract(a, &common, echoed),
        Cmd::W2(a) => commands::w2(a, &common, echoed),
    }?;
    for path in run.write()? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
