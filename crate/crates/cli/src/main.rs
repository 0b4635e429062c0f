mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Overrides;
use config::{Config, SpectrumSection};
use nnrad::IterationStrategy;

#[derive(Parser, Debug)]
#[command(
    name = "nnrad",
    version,
    about = "Newmark/Newton-Raphson integration with AD Jacobians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Newton strategy: full, simplified or broyden.
    #[arg(long)]
    strategy: Option<IterationStrategy>,
    /// Time step [s]; for `spectrum`, the sample interval.
    #[arg(long)]
    dt: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a system and write its trajectory as CSV.
    Solve(Common),
    /// Run a speed sweep and write steady-state amplitudes as CSV.
    Sweep(Common),
    /// Amplitude spectrum of one column of a trajectory CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV to analyse.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Column name, e.g. `x_0`.
        #[arg(long)]
        column: Option<String>,
    },
    /// Compare AD residual Jacobians with finite differences.
    CheckJacobian(Common),
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(common: &Common) -> Result<Config> {
    let path = common
        .config
        .as_ref()
        .context("--config <path> is required")?;
    Config::load(path)
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        strategy: c.strategy,
        dt: c.dt,
        seed: c.seed,
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = load(&c)?;
            let mut out = open_out(&c.out)?;
            commands::solve(&cfg, &overrides(&c), &mut out)?;
            out.flush()?;
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let mut out = open_out(&c.out)?;
            commands::sweep(&cfg, &overrides(&c), &mut out)?;
            out.flush()?;
        }
        Command::Spectrum {
            common,
            input,
            column,
        } => {
            let mut sec = match &common.config {
                Some(_) => load(&common)?.spectrum.unwrap_or_default(),
                None => SpectrumSection::default(),
            };
            sec.input = input.or(sec.input);
            sec.column = column.or(sec.column);
            sec.dt = common.dt.or(sec.dt);
            let mut out = open_out(&common.out)?;
            commands::spectrum(&sec, &mut out)?;
            out.flush()?;
        }
        Command::CheckJacobian(c) => {
            let cfg = load(&c)?;
            let mut out = open_out(&c.out)?;
            let pass = commands::check_jacobian(&cfg, &overrides(&c), &mut out)?;
            out.flush()?;
            return Ok(pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
