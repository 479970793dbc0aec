use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sinuous_tools::commands::{self, FitInputs};
use sinuous_tools::{CliError, RunConfig};

/// Dispersion modeling and pulse compression for log-periodic sinuous antennas.
#[derive(Parser)]
#[command(name = "sinuous", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides io.out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fit restart seed; overrides fit.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Arm polylines, SVG outline and design checks.
    Geom(Common),
    /// Model phase and group delay on the configured grid.
    Model(Common),
    /// Fit the phase model to a phase or field CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Phase CSV (f_hz,phase_rad); overrides io.phase_in.
        #[arg(long, conflicts_with = "field")]
        phase: Option<PathBuf>,
        /// Field CSV (f_hz,re,im[,v_re,v_im]); overrides io.field_in.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Input, dispersed and compressed pulses with metrics.
    Pulse(Common),
    /// Dispersed and compressed B-scans of a point target.
    Bscan(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = common
        .out
        .clone()
        .or_else(|| cfg.path("io.out_dir"))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Geom(c) => {
            let (cfg, out) = load(&c)?;
            print!("{}", commands::cmd_geom(&cfg, &out)?);
        }
        Command::Model(c) => {
            let (cfg, out) = load(&c)?;
            commands::cmd_model(&cfg, &out)?;
        }
        Command::Fit { common, phase, field } => {
            let (cfg, out) = load(&common)?;
            let inputs = FitInputs {
                phase,
                field,
                seed: common.seed,
            };
            commands::cmd_fit(&cfg, &inputs, &out)?;
        }
        Command::Pulse(c) => {
            let (cfg, out) = load(&c)?;
            commands::cmd_pulse(&cfg, &out)?;
        }
        Command::Bscan(c) => {
            let (cfg, out) = load(&c)?;
            commands::cmd_bscan(&cfg, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
