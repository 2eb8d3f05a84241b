//! Command-line front end.
//!
//! Exit codes: 0 success or PASS, 2 usage or configuration error, 3 witness
//! not found, 4 some certificate INDECISIVE, 5 some certificate FAIL.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orbitscope::{Error, Exact, Float, NumericMode};
use serde_json::json;

use commands::WitnessKind;
use config::{Resolved, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "orbitscope", version, about = "Coarse orbits and limit sets of weighted shift operators")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<NumericMode>,
    /// Output file, or directory for `certify`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the orbit `x, Tx, ..., T^k x` as CSV.
    Orbit {
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 10)]
        k: u64,
    },
    /// Look for a witness that `y` lies in a coarse set of `x`.
    Witness {
        #[arg(long, value_enum)]
        kind: WitnessKind,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Run named certificates ("all" by default) and write a report bundle.
    Certify { names: Vec<String> },
    /// Randomised evidence search over an operator family.
    Explore {
        /// Family JSON; defaults to the config's `family`.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn parse_mode(s: &str) -> Result<NumericMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> orbitscope::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn error_exit(err: &Error) -> u8 {
    eprintln!("error: {err}");
    println!("{}", json!({ "status": "error", "message": err.to_string() }));
    2
}

fn by_mode<T>(cfg: &Resolved, exact: impl FnOnce() -> T, float: impl FnOnce() -> T) -> T {
    match cfg.mode {
        NumericMode::Exact => exact(),
        NumericMode::Float => float(),
    }
}

fn run(cli: Cli) -> u8 {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let cfg = match file.and_then(|c| c.resolve(cli.seed, cli.mode, cli.out.clone())) {
        Ok(cfg) => cfg,
        Err(e) => return error_exit(&e),
    };
    let out = cfg.out.as_deref();
    match &cli.command {
        Command::Orbit { x, k } => {
            let csv = by_mode(&cfg, || commands::orbit_csv::<Exact>(&cfg, x, *k), || commands::orbit_csv::<Float>(&cfg, x, *k));
            match csv.and_then(|text| emit(out, &text)) {
                Ok(()) => 0,
                Err(e) => error_exit(&e),
            }
        }
        Command::Witness { kind, x, y, d } => {
            let found = by_mode(
                &cfg,
                || commands::witness::<Exact>(&cfg, *kind, x, y, d),
                || commands::witness::<Float>(&cfg, *kind, x, y, d),
            );
            let (value, code) = match found {
                Ok(value) => (value, 0),
                Err(e) if e.is_not_found() => {
                    eprintln!("no witness: {e}");
                    (commands::not_found_json(*kind, &e), 3)
                }
                Err(e) => return error_exit(&e),
            };
            match emit(out, &format!("{value:#}\n")) {
                Ok(()) => code,
                Err(e) => error_exit(&e),
            }
        }
        Command::Certify { names } => {
            let dir = out.map_or_else(|| PathBuf::from("reports"), Path::to_path_buf);
            match commands::certify(&cfg, names, &dir) {
                Ok((reports, code)) => {
                    for report in &reports {
                        eprintln!("{}", report.summary_line());
                    }
                    eprintln!("bundle written to {}", dir.display());
                    code as u8
                }
                Err(e) => error_exit(&e),
            }
        }
        Command::Explore { family, trials } => {
            match commands::explore(&cfg, family.as_deref(), *trials).and_then(|v| emit(out, &format!("{v:#}\n"))) {
                Ok(()) => 0,
                Err(e) => error_exit(&e),
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
