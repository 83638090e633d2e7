//! Command-line front end for the `bdrlab` experiments.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use commands::Outcome;
pub use error::{CliError, EXIT_GATE_FAILED};
use output::{Metadata, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bdrlab", version, about = "Boundary regression experiments")]
pub struct Cli {
    /// TOML file with one table per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit a synthetic distance, feature or observation series.
    Synth(commands::SynthArgs),
    /// Variance-ratio sweep over kernel width and stride.
    Scaling(commands::ScalingArgs),
    /// FLOPs breakdown for the adaptive token model.
    Flops(commands::FlopsArgs),
    /// Coverage calibration error of predicted uncertainties.
    Calib(commands::CalibArgs),
    /// Hysteresis effect on a synthetic tau trace.
    AtrSim(commands::AtrSimArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Synth(_) => "synth",
            Self::Scaling(_) => "scaling",
            Self::Flops(_) => "flops",
            Self::Calib(_) => "calib",
            Self::AtrSim(_) => "atr-sim",
        }
    }
}

fn table_key(command: &str) -> String {
    command.replace('-', "_")
}

/// Resolves configuration, runs the command and writes its report.
/// Returns the process exit code.
pub fn run(cli: Cli) -> Result<u8, CliError> {
    let file = cli.config.as_deref().map(config::load_file).transpose()?;
    let (format, output) = resolve_output(&cli, file.as_ref())?;
    let name = cli.command.name();
    let key = table_key(name);
    let file = file.as_ref();

    let (outcome, hash) = with_pool(|| -> Result<_, CliError> {
        Ok(match &cli.command {
            Command::Synth(a) => {
                let c: commands::SynthConfig = config::merge(file, &key, a)?;
                (commands::synth(&c)?, config::config_hash(name, &c))
            }
            Command::Scaling(a) => {
                let c: commands::ScalingConfig = config::merge(file, &key, a)?;
                (commands::scaling(&c)?, config::config_hash(name, &c))
            }
            Command::Flops(a) => {
                let c: commands::FlopsConfig = config::merge(file, &key, a)?;
                (commands::flops(&c)?, config::config_hash(name, &c))
            }
            Command::Calib(a) => {
                let c: commands::CalibConfig = config::merge(file, &key, a)?;
                (commands::calib(&c)?, config::config_hash(name, &c))
            }
            Command::AtrSim(a) => {
                let c: commands::AtrSimConfig = config::merge(file, &key, a)?;
                (commands::atr_sim(&c)?, config::config_hash(name, &c))
            }
        })
    })??;

    let Outcome {
        seed,
        tables,
        gate_passed,
    } = outcome;
    let report = Report {
        metadata: Metadata {
            command: name,
            seed,
            config_hash: hash,
        },
        tables,
    };
    emit(&report, format, output.as_deref())?;
    Ok(if gate_passed { 0 } else { EXIT_GATE_FAILED })
}

fn resolve_output(cli: &Cli, file: Option<&toml::Table>) -> Result<(Format, Option<PathBuf>), CliError> {
    let from_file = |key: &str| file.and_then(|f| f.get(key));
    let format = match (cli.format, from_file("format")) {
        (Some(f), _) => f,
        (None, None) => Format::Csv,
        (None, Some(v)) => v
            .clone()
            .try_into()
            .map_err(|_| CliError::Config("`format` must be \"csv\" or \"json\"".into()))?,
    };
    let output = match (&cli.output, from_file("output")) {
        (Some(p), _) => Some(p.clone()),
        (None, None) => None,
        (None, Some(toml::Value::String(s))) => Some(PathBuf::from(s)),
        (None, Some(_)) => return Err(CliError::Config("`output` must be a string".into())),
    };
    Ok((format, output))
}

/// Runs `f` on a dedicated pool when `BDRLAB_THREADS` is set.
fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let Ok(raw) = std::env::var("BDRLAB_THREADS") else {
        return Ok(f());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("BDRLAB_THREADS must be a positive integer, got `{raw}`")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(pool.install(f))
}

/// Sibling path `<stem>_<table>.csv` for the extra tables of a report.
pub fn sibling_path(primary: &Path, table: &str) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    primary.with_file_name(format!("{stem}_{table}.csv"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit(report: &Report, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    match (format, output) {
        (Format::Json, Some(path)) => write_file(path, &report.to_json()?),
        (Format::Json, None) => write_stdout(&report.to_json()?),
        (Format::Csv, Some(path)) => {
            for (i, t) in report.tables.iter().enumerate() {
                let target = if i == 0 { path.to_owned() } else { sibling_path(path, t.name) };
                write_file(&target, &t.to_csv()?)?;
            }
            Ok(())
        }
        (Format::Csv, None) => {
            let mut buf = Vec::new();
            for (i, t) in report.tables.iter().enumerate() {
                if i > 0 {
                    buf.push(b'\n');
                }
                buf.extend(t.to_csv()?);
            }
            write_stdout(&buf)
        }
    }
}

fn write_stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|()| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_keeps_directory_and_stem() {
        assert_eq!(
            sibling_path(Path::new("out/run.csv"), "fit"),
            PathBuf::from("out/run_fit.csv")
        );
    }

    #[test]
    fn command_names_map_to_table_keys() {
        assert_eq!(table_key("atr-sim"), "atr_sim");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
