use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod exit;
mod output;

use config::RunConfig;
use exit::CliError;

/// Normal forms, KAM steps and rigid-body integration for the throbbing top.
#[derive(Debug, Parser)]
#[command(name = "lie-kam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "T")]
    duration: Option<f64>,
    /// Number of random initial conditions.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Largest accepted rho drift.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the Euler equations from random points on the momentum sphere.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: TrajectoryArgs,
        /// Also write stroboscopic sections.
        #[arg(long)]
        section: bool,
    },
    /// Like simulate, but write only the stroboscopic sections.
    Section {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: TrajectoryArgs,
    },
    /// One normal-form step on a preset perturbation.
    Normalize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        /// Lie-series tail tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Repeated normal-form steps with the bound schedule.
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "gamma-scan")]
        gamma_scan: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Certify the analytic bounds on random admissible triples.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "gamma-scan")]
        gamma_scan: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Randomized operator-identity suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "gamma-scan")]
        gamma_scan: Option<usize>,
    },
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_trajectory_args(cfg: &mut RunConfig, run: &TrajectoryArgs) {
    let sim = &mut cfg.simulate;
    if let Some(p) = &run.preset {
        sim.preset = p.clone();
    }
    sim.eps = run.eps.or(sim.eps);
    sim.h = run.h.or(sim.h);
    sim.duration = run.duration.or(sim.duration);
    sim.n = run.n.unwrap_or(sim.n);
    sim.stride = run.stride.unwrap_or(sim.stride);
    sim.rho_tol = run.tol.unwrap_or(sim.rho_tol);
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("LIE_KAM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "LIE_KAM_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate {
            common,
            run,
            section,
        } => {
            let mut cfg = resolve(&common)?;
            apply_trajectory_args(&mut cfg, &run);
            cfg.simulate.section |= section;
            commands::simulate(&cfg, true)
        }
        Command::Section { common, run } => {
            let mut cfg = resolve(&common)?;
            apply_trajectory_args(&mut cfg, &run);
            cfg.simulate.section = true;
            commands::simulate(&cfg, false)
        }
        Command::Normalize {
            common,
            preset,
            eps,
            tol,
        } => {
            let mut cfg = resolve(&common)?;
            let nf = &mut cfg.normalize;
            if let Some(p) = preset {
                nf.preset = p;
            }
            nf.eps = eps.or(nf.eps);
            nf.lie.tol = tol.unwrap_or(nf.lie.tol);
            commands::normalize(&cfg)
        }
        Command::Iterate {
            common,
            preset,
            eps,
            steps,
            tau,
            gamma_scan,
            tol,
        } => {
            let mut cfg = resolve(&common)?;
            let it = &mut cfg.iterate;
            if let Some(p) = preset {
                it.preset = p;
            }
            it.eps = eps.or(it.eps);
            it.kam.steps = steps.unwrap_or(it.kam.steps);
            it.tau = tau.unwrap_or(it.tau);
            it.gamma_scan = gamma_scan.unwrap_or(it.gamma_scan);
            it.kam.lie.tol = tol.unwrap_or(it.kam.lie.tol);
            commands::iterate(&cfg)
        }
        Command::Bounds {
            common,
            tau,
            gamma_scan,
            trials,
        } => {
            let mut cfg = resolve(&common)?;
            let b = &mut cfg.bounds;
            b.tau = tau.unwrap_or(b.tau);
            b.k_scan = gamma_scan.unwrap_or(b.k_scan);
            b.trials = trials.unwrap_or(b.trials);
            commands::bounds(&cfg)
        }
        Command::Verify {
            common,
            trials,
            tau,
            gamma_scan,
        } => {
            let mut cfg = resolve(&common)?;
            let v = &mut cfg.verify;
            v.trials = trials.unwrap_or(v.trials);
            v.diophantine.tau = tau.unwrap_or(v.diophantine.tau);
            v.diophantine.k_scan = gamma_scan.unwrap_or(v.diophantine.k_scan);
            commands::verify(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
