use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use plectic_core::scenario::{parse_scenario, run, SUITES};

#[derive(Parser)]
#[command(name = "plectic", version, about = "Verify plectic point scenarios p-adically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Kv,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on a scenario file.
    Verify {
        scenario: PathBuf,
        /// Suite to run; repeat for several. Defaults to the scenario's list.
        #[arg(long = "suite", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suites: Vec<String>,
        /// Working precision in p-adic digits, overriding the scenario.
        #[arg(long)]
        precision: Option<i64>,
        /// Seed for the randomized property checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the key-value report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        /// Record wall times; without it `time_ms` is always 0.
        #[arg(long)]
        timing: bool,
    },
}

fn main() -> ExitCode {
    let Command::Verify { scenario, suites, precision, seed, report, format, timing } = Cli::parse().command;
    let text = match std::fs::read_to_string(&scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", scenario.display());
            return ExitCode::from(2);
        }
    };
    let parsed = parse_scenario(&text).and_then(|s| match precision {
        Some(n) => s.with_precision(n),
        None => Ok(s),
    });
    let scenario = match parsed {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", scenario.display());
            return ExitCode::from(2);
        }
    };
    let suites = if suites.is_empty() { scenario.suites.clone() } else { suites };
    let result = run(&scenario, &suites, seed);
    let kv = result.to_kv(timing);
    match format {
        Format::Kv => print!("{kv}"),
        Format::Human => print!("{}", result.to_human(timing)),
    }
    if let Some(path) = report {
        if let Err(e) = std::fs::write(&path, &kv) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if result.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
