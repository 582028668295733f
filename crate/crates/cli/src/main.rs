//! `empconc`: evaluate, invert, compare, and certify concentration bounds for
//! suprema of empirical processes.
//!
//! Exit codes: 0 when every check passes, 1 when an authoritative check
//! fails, 2 on usage, parse, or domain errors.

mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use empconc_core::bound_functions::{Side, TailForm};
use empconc_core::verify::{CertifyMode, DEFAULT_GRID_POINTS};

use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "empconc",
    version,
    about = "Concentration bounds for suprema of empirical processes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,

    /// Write output to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for simulation (default: machine parallelism); never changes results
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one tail bound
    #[command(allow_negative_numbers = true)]
    Bound {
        #[arg(long)]
        side: Side,
        #[arg(long)]
        form: TailForm,
        #[arg(long)]
        mean_z: f64,
        #[arg(long)]
        v_n: f64,
        #[arg(long)]
        x: f64,
    },
    /// Deviation at which a tail bound reaches the level delta
    #[command(allow_negative_numbers = true)]
    Invert {
        #[arg(long)]
        side: Side,
        #[arg(long)]
        form: TailForm,
        #[arg(long)]
        mean_z: f64,
        #[arg(long)]
        v_n: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Table of every bound over a grid of deviations
    #[command(allow_negative_numbers = true)]
    Compare {
        #[arg(long)]
        mean_z: f64,
        #[arg(long)]
        v_n: f64,
        /// start:stop:count or a comma list
        #[arg(long)]
        x_grid: String,
    },
    /// Certify the bounds on a scenario file, exactly or by simulation
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deviations x (default: 50 points spanning the range of Z)
        #[arg(long)]
        x_grid: Option<String>,
        /// Arguments t of the log-Laplace checks
        #[arg(long, default_value = "0:3:61")]
        t_grid: String,
        /// auto, exact, or mc
        #[arg(long, default_value = "auto")]
        mode: CertifyMode,
        /// Relative change of a bound constant, NAME=REL; positive loosens, negative tightens
        #[arg(long, value_name = "NAME=REL")]
        perturb: Vec<String>,
    },
    /// Run the seed-free lemma suite and report the roots t0 and t1
    Lemmas {
        /// Grid nodes per unit length (at least 100)
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command, &cli.io) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
