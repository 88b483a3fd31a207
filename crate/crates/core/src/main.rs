// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chainprop::io::{resolve_config, run, Experiment, RUN_RECORD_FILE};

const DEFAULT_OUT: &str = "chainprop-out";

#[derive(Parser)]
#[command(
    name = "chainprop",
    version,
    about = "Information propagation in noisy quantum chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo trajectories of the noisy one-particle chain.
    Ensemble(RunArgs),
    /// Closed-form averaged propagator and the dephasing density equation.
    Exact(RunArgs),
    /// Master-equation evolution of a small spin chain.
    Lindblad(RunArgs),
    /// Closed-form envelopes and the regime classification.
    Bounds(RunArgs),
    /// Spreading exponents of the mean squared displacement and fronts.
    Analyze(RunArgs),
    /// Structure matrix, rank report and spectral relaxation verdict.
    Mixing(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; defaults are used without one.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set chain.gamma=0.2`.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory. Falls back to `out_dir` in the config, then `CHAINPROP_OUT`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn execute(experiment: Experiment, args: RunArgs) -> chainprop::Result<()> {
    let text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            chainprop::Error::from(e).context(format!("reading {}", path.display()))
        })?),
        None => None,
    };
    let config = resolve_config(text.as_deref(), experiment, &args.overrides)?;
    if args.print_config {
        print!("{}", config.to_toml()?);
        return Ok(());
    }
    let out_dir = args
        .out
        .or_else(|| config.out_dir.clone())
        .or_else(|| std::env::var_os("CHAINPROP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let record = run(&config, &out_dir)?;
    for output in &record.outputs {
        println!(
            "{}  {}",
            output.sha256,
            out_dir.join(&output.path).display()
        );
    }
    println!(
        "{experiment}: {} outputs in {:.2} s, record {}",
        record.outputs.len(),
        record.wall_clock_seconds,
        out_dir.join(RUN_RECORD_FILE).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Ensemble(a) => (Experiment::Ensemble, a),
        Command::Exact(a) => (Experiment::Exact, a),
        Command::Lindblad(a) => (Experiment::Lindblad, a),
        Command::Bounds(a) => (Experiment::Bounds, a),
        Command::Analyze(a) => (Experiment::Analyze, a),
        Command::Mixing(a) => (Experiment::Mixing, a),
    };
    match execute(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
