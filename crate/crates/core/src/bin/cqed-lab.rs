use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cqed_lab::scenario::{run, write_tables, ScenarioConfig, ScenarioError, PRESETS};

/// Runs a named scenario and writes its tables as CSV.
#[derive(Parser)]
#[command(version, about, after_help = format!("Scenarios: {}", PRESETS.join(", ")))]
struct Cli {
    /// Scenario to run with its default settings.
    #[arg(required_unless_present = "config", conflicts_with = "config")]
    scenario: Option<String>,
    /// Configuration file; must contain `scenario.name = ...`.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Override one setting, e.g. `--set atoms.n=500`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cqed-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut config = match (&cli.scenario, &cli.config) {
        (Some(name), _) => ScenarioConfig::preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
            ScenarioConfig::from_text(&text)?
        }
        (None, None) => unreachable!("clap enforces one source"),
    };
    for assignment in &cli.set {
        config.apply(assignment)?;
    }
    let tables = run(&config)?;
    write_tables(&cli.out, &config, &tables)
}
