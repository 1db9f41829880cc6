//! `rqec`: experiment runner for the reservoir-cooled repetition code.
//!
//! Exit codes: 0 on success, 1 on runtime failure or a failed gate check,
//! 2 on invalid configuration or arguments.

mod config;
mod rate_model;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::InvalidInput;
use reservoir_qec::compiler::{verify_gates, Protocol, GATE_TOLERANCE};

#[derive(Parser)]
#[command(name = "rqec", version, about = "Reservoir-cooled three-qubit error correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by the simulation commands.
#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Master seed, replacing `run.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trajectories, replacing `run.n_traj`.
    #[arg(long)]
    traj: Option<u64>,
    /// Number of rounds, replacing `run.rounds`.
    #[arg(long)]
    rounds: Option<usize>,
    /// Output directory, replacing `run.output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory ensemble and write metrics.csv, rounds.csv and summary.txt.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Also integrate the master equation and report trace distances.
        #[arg(long)]
        oracle: bool,
    },
    /// Compare compiled gates and rounds with their ideal unitaries.
    VerifyGates {
        /// Angle added to every control field (fault injection).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        perturb: f64,
        /// Print both round schedules step by step.
        #[arg(long)]
        show_schedules: bool,
    },
    /// Evaluate the analytic rate models.
    RateModel {
        #[command(subcommand)]
        model: rate_model::RateModel,
        /// Write `<model>.csv` and `<model>_report.txt` here instead of stdout.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Per-round trajectory results next to the rate-equation predictions.
    Compare {
        #[command(flatten)]
        args: RunArgs,
    },
}

fn verify(perturb: f64, show_schedules: bool) -> anyhow::Result<bool> {
    if !perturb.is_finite() {
        return Err(config::invalid("--perturb must be finite"));
    }
    if show_schedules {
        for protocol in [Protocol::Measured, Protocol::MeasurementFree] {
            println!("{protocol:?} round");
            println!("{}", protocol.build::<f64>()?);
        }
    }
    let checks = verify_gates(perturb)?;
    println!("{:<24} {:>6} {:>6} {:>12}  result", "construction", "qubits", "steps", "distance");
    for c in &checks {
        let verdict = if c.passed() { "ok" } else { "FAIL" };
        println!("{:<24} {:>6} {:>6} {:>12.3e}  {verdict}", c.name, c.n_qubits, c.steps, c.distance);
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("tolerance {GATE_TOLERANCE:e}; {failed} of {} over", checks.len());
    Ok(failed == 0)
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { args, oracle } => run::cmd_run(&args, oracle).map(|_| true),
        Command::VerifyGates { perturb, show_schedules } => verify(perturb, show_schedules),
        Command::RateModel { model, out } => rate_model::cmd_rate_model(&model, out.as_deref()).map(|_| true),
        Command::Compare { args } => run::cmd_compare(&args).map(|_| true),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
