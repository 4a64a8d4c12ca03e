use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use avc_sim::experiment::{run, Command, Overrides};

#[derive(Parser)]
#[command(name = "avc-sim", version, about = "Capacity, coding and lemma experiments for state-dependent AVCs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Cmd {
    /// Capacity of a Gaussian or discrete channel.
    Capacity,
    /// Monte Carlo run of the binned code on a discrete channel.
    SimulateGp,
    /// Monte Carlo run of the dirty-paper code on the Gaussian channel.
    SimulateDp,
    /// Monte Carlo checks of the concentration lemmas.
    Lemmas,
    /// Repeat the configured mode over the values of one numeric key.
    Sweep,
}

#[derive(Args)]
struct Common {
    /// Experiment config (key = value lines with [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write an SVG plot of the summary.
    #[arg(long, global = true)]
    plot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Capacity => Command::Capacity,
        Cmd::SimulateGp => Command::SimulateGp,
        Cmd::SimulateDp => Command::SimulateDp,
        Cmd::Lemmas => Command::Lemmas,
        Cmd::Sweep => Command::Sweep,
    };
    let c = cli.common;
    let overrides =
        Overrides { config: c.config, out: c.out, seed: c.seed, trials: c.trials, jobs: c.jobs, plot: c.plot };
    match run(command, &overrides) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", outcome.out_dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("avc-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
