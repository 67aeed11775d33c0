use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nflbo::nflt::FunctionClass;
use nflbo_cli::commands;
use nflbo_cli::config::{
    load, BenchConfig, GpPlotConfig, LandscapeConfig, NfltVerifyConfig, OptimizeConfig,
};
use nflbo_cli::CliResult;

#[derive(Parser)]
#[command(
    name = "nflbo",
    version,
    about = "No-free-lunch verification, Bayesian optimization and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (bench only).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively compare search policies over a finite function class.
    NfltVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        k: Option<usize>,
        /// full, monotone or constant.
        #[arg(long)]
        class: Option<FunctionClass>,
        /// Repeat to list policies, e.g. --policy top-first --policy bottom-first.
        #[arg(long = "policy")]
        policies: Vec<String>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Run one optimizer on a landscape or an external evaluator.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// random, sa, ga, es or bo.
        #[arg(long)]
        algorithm: Option<String>,
        /// Landscape as name or name:dimension.
        #[arg(long)]
        landscape: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Run every algorithm on every landscape for several seeds.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Repeat to list algorithms.
        #[arg(long = "algorithm")]
        algorithms: Vec<String>,
        /// Repeat to list landscapes (name or name:dimension).
        #[arg(long = "landscape")]
        landscapes: Vec<String>,
        /// Runs per (algorithm, landscape) cell.
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Emit GP posterior and expected-improvement curves for 1-D data.
    GpPlotdata {
        #[command(flatten)]
        common: Common,
        /// CSV file with header x,y.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        grid_points: Option<usize>,
    },
}

fn apply<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::NfltVerify {
            common,
            m,
            r,
            k,
            class,
            policies,
            cap,
        } => {
            let mut cfg: NfltVerifyConfig = load(common.config.as_deref())?;
            apply(&mut cfg.seed, common.seed);
            apply(&mut cfg.out, common.out);
            apply(&mut cfg.m, m);
            apply(&mut cfg.r, r);
            apply(&mut cfg.k, k);
            apply(&mut cfg.class, class);
            apply(&mut cfg.cap, cap);
            if !policies.is_empty() {
                cfg.policies = policies;
            }
            commands::nflt_verify(&cfg)
        }
        Command::Optimize {
            common,
            algorithm,
            landscape,
            budget,
        } => {
            let mut cfg: OptimizeConfig = load(common.config.as_deref())?;
            apply(&mut cfg.seed, common.seed);
            apply(&mut cfg.out, common.out);
            apply(&mut cfg.algorithm, algorithm);
            apply(&mut cfg.budget, budget);
            if let Some(l) = landscape {
                cfg.landscape = Some(LandscapeConfig::parse(&l)?);
                cfg.evaluator = None;
            }
            commands::optimize(&cfg)
        }
        Command::Bench {
            common,
            algorithms,
            landscapes,
            runs,
            budget,
        } => {
            let mut cfg: BenchConfig = load(common.config.as_deref())?;
            apply(&mut cfg.seed, common.seed);
            apply(&mut cfg.out, common.out);
            apply(&mut cfg.jobs, common.jobs);
            apply(&mut cfg.runs, runs);
            apply(&mut cfg.budget, budget);
            if !algorithms.is_empty() {
                cfg.algorithms = algorithms;
            }
            if !landscapes.is_empty() {
                cfg.landscapes = landscapes
                    .iter()
                    .map(|l| LandscapeConfig::parse(l))
                    .collect::<CliResult<_>>()?;
            }
            commands::bench(&cfg)
        }
        Command::GpPlotdata {
            common,
            data,
            grid_points,
        } => {
            let mut cfg: GpPlotConfig = load(common.config.as_deref())?;
            apply(&mut cfg.seed, common.seed);
            apply(&mut cfg.out, common.out);
            apply(&mut cfg.grid_points, grid_points);
            if data.is_some() {
                cfg.data_file = data;
            }
            commands::gp_plotdata(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
