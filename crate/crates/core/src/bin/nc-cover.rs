use std::process::ExitCode;

use clap::Parser;
use nc_cover::scenario::{self, OutputFormat, ScenarioConfig};
use nc_cover::Error;

/// Runs named verification scenarios on noncommutative torus covers.
///
/// Scenario options: `--key value` parameters, `--seed N`, `--json PATH`,
/// `--tol-LABEL X`, `--format text|json`, `--parallel`, `--dump-witness`.
/// Exit status is 0 when every check passes, 1 on a failed check and 2 on a
/// usage error.
#[derive(Parser, Debug)]
#[command(name = "nc-cover", version)]
struct Cli {
    /// Scenario name, or `list`.
    scenario: String,
    /// Scenario options.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    rest: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.scenario == "list" {
        if !cli.rest.is_empty() {
            eprintln!("error: `list` takes no options");
            return ExitCode::from(2);
        }
        for (name, desc) in scenario::list_scenarios() {
            println!("{name:<20} {desc}");
        }
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::UnknownScenario(_) | Error::InvalidArgument(_) => {
                    if let Error::UnknownScenario(_) = e {
                        eprintln!("run `nc-cover list` for the registered scenarios");
                    }
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> nc_cover::Result<bool> {
    let config = ScenarioConfig::parse_args(&cli.scenario, &cli.rest)?;
    let report = scenario::run(&config)?;
    match config.format {
        OutputFormat::Text => print!("{}", report.to_text()),
        OutputFormat::Json => println!("{}", report.to_json(false)?),
    }
    Ok(report.pass)
}
