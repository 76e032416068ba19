// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;
mod plot;

use commands::Flags;
use config::{ConfigError, ExperimentConfig};
use output::RunWriter;

/// Boundary damping identification experiments for the wave equation.
#[derive(Parser)]
#[command(name = "dwinv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate eigenpairs and their admissibility.
    Eigen(RunArgs),
    /// Solve the damped problem, write energy and boundary traces.
    Forward(RunArgs),
    /// Sweep the damping scale and check the stability estimate.
    Sweep(RunArgs),
    /// Recover b from a synthetic measurement; run the uniqueness check.
    Reconstruct(RunArgs),
    /// Run the acceptance checklist.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write eigenfunctions or full fields.
    #[arg(long)]
    dump: bool,
    /// Compare against the spectral solver (forward).
    #[arg(long)]
    oracle: bool,
    /// Coarse grids and reduced tolerances (verify).
    #[arg(long)]
    quick: bool,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<dwinv_core::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(_) => 2,
        None => 1,
    }
}

type Handler = fn(&ExperimentConfig, &mut RunWriter, Flags) -> anyhow::Result<bool>;

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (name, args, f): (&str, RunArgs, Handler) = match cli.command {
        Command::Eigen(a) => ("eigen", a, commands::eigen),
        Command::Forward(a) => ("forward", a, commands::forward),
        Command::Sweep(a) => ("sweep", a, commands::sweep),
        Command::Reconstruct(a) => ("reconstruct", a, commands::reconstruct),
        Command::Verify(a) => ("verify", a, commands::verify),
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(name));
    let flags = Flags {
        dump: args.dump || cfg.output.dump,
        oracle: args.oracle,
        quick: args.quick,
    };
    cfg.output.dir = Some(dir.clone());
    let mut writer = RunWriter::create(&dir)?;
    let pass = f(&cfg, &mut writer, flags)?;
    let manifest = writer.finish(name, &cfg)?;
    log::info!("wrote {}", manifest.display());
    Ok(pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
