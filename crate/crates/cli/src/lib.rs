//! Command-line front end: scenario parsing, the four subcommands and their
//! outputs.
//!
//! Exit codes: 0 on success (including verify tables with failed checks),
//! 1 when an output file cannot be written, 2 for configuration errors and 3
//! for numerical failures.

pub mod config;
pub mod report;
pub mod verify;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use phs_core::PhsError;

pub use config::{Config, ConfigError};

/// Failure of one scenario.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(PhsError),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Output(e) => write!(f, "output error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<PhsError> for CliError {
    fn from(e: PhsError) -> Self {
        CliError::Numerical(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Simulate,
    Spectrum,
    Verify,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Output directory; reports go to stdout when absent (simulate then uses `.`).
    pub out: Option<PathBuf>,
    pub suite: Option<String>,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let err = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports contain no maps with non-string keys");
    s.push('\n');
    s
}

/// Emits a JSON report either to `DIR/<name>.<kind>.json` or to the returned text.
fn emit(out: Option<&Path>, name: &str, kind: &str, json: String) -> Result<String, CliError> {
    match out {
        Some(dir) => {
            let path = dir.join(format!("{name}.{kind}.json"));
            write_atomic(&path, json.as_bytes())?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(json),
    }
}

/// Runs one command on one scenario and returns the text for stdout.
pub fn run(cmd: Command, mut cfg: Config, opts: &Options) -> Result<String, CliError> {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let out = opts.out.as_deref();
    match cmd {
        Command::Analyze => emit(out, &cfg.name, "analyze", to_json(&report::analyze(&cfg)?)),
        Command::Spectrum => emit(out, &cfg.name, "spectrum", to_json(&report::spectrum(&cfg)?)),
        Command::Simulate => {
            let dir = out.unwrap_or(Path::new("."));
            let (series, summary) = report::simulate(&cfg)?;
            let mut csv = Vec::new();
            series.write_csv(&mut csv)?;
            let csv_path = dir.join(&summary.csv);
            write_atomic(&csv_path, &csv)?;
            let json_path = dir.join(format!("{}.summary.json", cfg.name));
            write_atomic(&json_path, to_json(&summary).as_bytes())?;
            Ok(format!("wrote {} and {}\n", csv_path.display(), json_path.display()))
        }
        Command::Verify => {
            let table = verify::verify(&cfg, opts.suite.as_deref())?;
            let mut text = table.render();
            if let Some(dir) = out {
                text.push_str(&emit(Some(dir), &cfg.name, "verify", to_json(&table))?);
            }
            Ok(text)
        }
    }
}

/// Outcome of one scenario in a batch.
#[derive(Debug)]
pub struct BatchItem {
    pub config: PathBuf,
    pub result: Result<String, CliError>,
}

/// Loads and runs every scenario, one worker thread each, and returns the
/// outcomes in input order.
pub fn run_batch(cmd: Command, configs: &[PathBuf], opts: &Options) -> Vec<BatchItem> {
    let run_one = |path: &PathBuf| BatchItem {
        config: path.clone(),
        result: Config::load(path).map_err(CliError::from).and_then(|cfg| run(cmd, cfg, opts)),
    };
    if configs.len() == 1 {
        return vec![run_one(&configs[0])];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|p| scope.spawn(move || run_one(p))).collect();
        handles
            .into_iter()
            .zip(configs)
            .map(|(h, p)| {
                h.join().unwrap_or_else(|_| BatchItem {
                    config: p.clone(),
                    result: Err(CliError::Numerical(PhsError::NoConvergence("worker thread panicked".into()))),
                })
            })
            .collect()
    })
}
