//! `ksphere`: Krylov-chain construction, sphere dynamics, geometric reports,
//! and identity verification from JSON run configs.
//!
//! Exit codes: 0 success, 1 internal error, 2 input validation, 3 identity
//! violation in `verify`.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ksphere_core::error::Error;

use config::{load_config, LoadedConfig, TimeGrid};
use output::OutputDir;

#[derive(Parser)]
#[command(name = "ksphere", version, about = "Operator-growth dynamics on the Krylov sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long, env = "KSPHERE_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, env = "KSPHERE_OUT", default_value = "out")]
    out: PathBuf,
    /// Random seed override.
    #[arg(long, env = "KSPHERE_SEED")]
    seed: Option<u64>,
    /// Time-grid end override.
    #[arg(long, env = "KSPHERE_T_MAX")]
    t_max: Option<f64>,
    /// Time-grid sample-count override.
    #[arg(long, env = "KSPHERE_SAMPLES")]
    samples: Option<usize>,
    /// Integrator relative tolerance override.
    #[arg(long, env = "KSPHERE_RTOL")]
    rtol: Option<f64>,
    /// Integrator absolute tolerance override.
    #[arg(long, env = "KSPHERE_ATOL")]
    atol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Lanczos chain and write chain.json.
    Lanczos {
        #[command(flatten)]
        common: CommonArgs,
        /// Also dump the operator basis into chain.json.
        #[arg(long)]
        basis: bool,
    },
    /// Evolve the amplitude vector; write trajectory.csv and diagnostics.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Geometric report: speed, curvature, torsion, geodesic residual,
    /// return-amplitude margins, uncertainty product.
    Geometry {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Level-space bounds report: tail envelope, fronts, complexity.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        /// Also emit the dense (level, time) tail-margin grid.
        #[arg(long)]
        tail_grid: bool,
    },
    /// Model-family tables: coefficients, closed-form amplitudes, predictions.
    Model {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the identity verification table; nonzero exit on any failure.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Self-test: corrupt the generator's skew-symmetry and require the
        /// table to catch it.
        #[arg(long)]
        inject_sign_flip: bool,
    },
}

fn apply_overrides(loaded: &mut LoadedConfig, common: &CommonArgs) {
    let config = &mut loaded.config;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(rtol) = common.rtol {
        config.tolerances.rtol = Some(rtol);
    }
    if let Some(atol) = common.atol {
        config.tolerances.atol = Some(atol);
    }
    match (common.t_max, common.samples) {
        (None, None) => {}
        (t_max, samples) => {
            let (old_t, old_n) = match &config.time_grid {
                TimeGrid::Linspace { t_max, num_samples } => (*t_max, *num_samples),
                TimeGrid::Explicit { times } => (times.last().copied().unwrap_or(10.0), times.len().max(2)),
            };
            config.time_grid = TimeGrid::Linspace {
                t_max: t_max.unwrap_or(old_t),
                num_samples: samples.unwrap_or(old_n),
            };
        }
    }
}

fn run(command: &Command) -> Result<bool, Error> {
    let common = match command {
        Command::Lanczos { common, .. }
        | Command::Evolve { common }
        | Command::Geometry { common }
        | Command::Bounds { common, .. }
        | Command::Model { common }
        | Command::Verify { common, .. } => common,
    };
    let mut loaded = load_config(common.config.as_deref())?;
    apply_overrides(&mut loaded, common);
    let dir = loaded
        .config
        .output_dir
        .clone()
        .unwrap_or_else(|| common.out.clone());
    let out = OutputDir::create(&dir, &loaded.sha256)?;

    match command {
        Command::Lanczos { basis, .. } => commands::cmd_lanczos(&loaded, &out, *basis)?,
        Command::Evolve { .. } => commands::cmd_evolve(&loaded, &out)?,
        Command::Geometry { .. } => commands::cmd_geometry(&loaded, &out)?,
        Command::Bounds { tail_grid, .. } => commands::cmd_bounds(&loaded, &out, *tail_grid)?,
        Command::Model { .. } => commands::cmd_model(&loaded, &out)?,
        Command::Verify {
            inject_sign_flip, ..
        } => {
            let outcome = verify::cmd_verify(&loaded, &out, *inject_sign_flip)?;
            return Ok(outcome.all_passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: identity verification failed");
            ExitCode::from(3)
        }
        Err(e) if e.is_validation() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
