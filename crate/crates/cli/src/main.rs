//! `puq`: spectrum tables, verification reports, sampled grids and canonical maps
//! for the Pais-Uhlenbeck oscillator, driven by a TOML config.
//!
//! Exit codes: 0 success, 1 a computation or check failed, 2 bad invocation or config.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{Format, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "puq", version, about = "Phase-space quantization of the Pais-Uhlenbeck oscillator")]
struct Cli {
    /// TOML run configuration; every table is optional.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Override the model parameters, e.g. `5,3,1` or `2,1,1/2`.
    #[arg(long, global = true, value_name = "OMEGA1,OMEGA2,HBAR", allow_hyphen_values = true)]
    params: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact energy table `E_nm`, or `E_mk` in equal-frequency mode.
    Spectrum,
    /// Run the check suite and write a JSON report; exits 1 if any check fails.
    Verify,
    /// Sample a Wigner function or wavefunction on the configured grid.
    Grid,
    /// Canonical map, generating function and pulled-back Hamiltonian as JSON.
    Transform,
    /// Print the effective configuration as TOML.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {}", path, e)))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.params {
        cfg.override_params(p)?;
    }
    if let Some(path) = &cli.output {
        cfg.output.path = Some(path.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    Ok(cfg)
}

fn json_only(cfg: &RunConfig, verb: &str) -> Result<(), CliError> {
    match cfg.output.format {
        Some(Format::Csv) => Err(CliError::Usage(format!("{} writes JSON only", verb))),
        _ => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let p = cfg.validate()?;
    let format = cfg.output.format.unwrap_or(Format::Csv);
    let text = match cli.command {
        Command::Spectrum => commands::spectrum_table(&cfg, &p, format)?,
        Command::Grid => commands::grid_output(&cfg, &p, format)?,
        Command::Transform => {
            json_only(&cfg, "transform")?;
            commands::transform_output(&cfg, &p)?
        }
        Command::Config => cfg.to_toml(),
        Command::Verify => {
            json_only(&cfg, "verify")?;
            let report = commands::verify_report(&cfg, &p);
            output::emit(&output::to_json(&report), cfg.output.path.as_deref())?;
            for c in &report.checks {
                eprintln!("{:<30} {:?}", c.name, c.status);
            }
            if !report.failed.is_empty() {
                return Err(CliError::ChecksFailed(report.failed.iter().map(|s| s.to_string()).collect()));
            }
            return Ok(());
        }
    };
    output::emit(&text, cfg.output.path.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("puq: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}
