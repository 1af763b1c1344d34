//! Experiment runner: selects a backend + scenario from a config file, runs
//! convergence sweeps and oracle comparisons, writes deterministic CSV
//! tables, and prints one summary line per experiment.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "evoprop",
    about = "Convergence and oracle experiments for evolution operators with central generator commutators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments described by a config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Override the seed of every experiment in the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for CSV output (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Suppress summary lines on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// List the built-in scenarios and what each one exercises.
    List {
        /// Restrict the listing to one backend id
        /// (heisenberg | nilpotent4 | weyl | vanhove | schrodinger).
        #[arg(long)]
        backend: Option<String>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out, quiet } => run_experiments(&config, seed, &out, quiet),
        Command::List { backend } => {
            list_scenarios(backend.as_deref());
            Ok(())
        }
    }
}

fn list_scenarios(backend: Option<&str>) {
    for scenario in scenarios::CATALOGUE {
        if backend.map(|b| b == scenario.backend).unwrap_or(true) {
            println!("{:<22} [{}] {}", scenario.name, scenario.backend, scenario.exercises);
        }
    }
}

fn run_experiments(config_path: &PathBuf, seed: Option<u64>, out_dir: &PathBuf, quiet: bool) -> Result<()> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("cannot read config {}", config_path.display()))?;
    let mut experiments = config::parse(&text)?;
    for experiment in &mut experiments {
        if let Some(s) = seed {
            experiment.seed = s;
        }
        if scenarios::lookup(&experiment.scenario).is_none() {
            return Err(anyhow!(
                "config references unknown scenario `{}` (try `evoprop list`)",
                experiment.scenario
            ));
        }
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    let mut failures = 0usize;
    for experiment in &experiments {
        let outcome = scenarios::run(experiment)
            .with_context(|| format!("scenario `{}` aborted", experiment.scenario))?;
        let file_name = experiment
            .out
            .clone()
            .unwrap_or_else(|| format!("{}.csv", experiment.scenario));
        let csv_path = out_dir.join(file_name);
        report::write_csv(&outcome, &csv_path)?;
        if !quiet {
            println!("{}", report::summary_line(&outcome, &csv_path));
        }
        if !outcome.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(anyhow!("{failures} experiment(s) did not meet their tolerances"));
    }
    Ok(())
}
