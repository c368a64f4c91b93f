mod commands;
mod config;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;
use tempfile::NamedTempFile;

use crate::config::RunConfig;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const THREADS_VAR: &str = "THRESHOLD_LAB_THREADS";

/// Batch driver for correlator tables, Monte Carlo critical points, logical
/// fidelities, thresholds and fidelity sweeps. Each run writes one CSV and a
/// `<out>.manifest.json` next to it.
#[derive(Debug, Parser)]
#[command(name = "threshold-lab", version)]
struct Args {
    /// Run description (flat `key = value` TOML).
    #[arg(long)]
    config: PathBuf,

    /// CSV destination; overrides `output_path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for stochastic commands; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; falls back to `threads` in the config, then THRESHOLD_LAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: "usage", message: message.into(), code: 2 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<threshold_lab::Error> for CliError {
    fn from(e: threshold_lab::Error) -> Self {
        // Bad inputs are usage errors; everything else failed while running.
        let code = if matches!(e, threshold_lab::Error::InvalidParameter { .. } | threshold_lab::Error::Regime { .. }) {
            2
        } else {
            1
        };
        Self { kind: e.kind(), message: e.to_string(), code }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { kind: "io", message: e.to_string(), code: 1 }
    }
}

fn thread_count(args: &Args, cfg: &RunConfig) -> Result<Option<usize>, CliError> {
    if let Some(n) = args.threads.or(cfg.threads) {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            v.trim().parse().map(Some).map_err(|_| CliError::usage(format!("{THREADS_VAR}={v} is not a thread count")))
        }
        Err(_) => Ok(None),
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory, so
/// the destination either keeps its old content or gets the full new one.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn execute(args: Args) -> Result<PathBuf, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.clone());
    }
    let out =
        cfg.output_path.clone().ok_or_else(|| CliError::usage("no output path: pass --out or set `output_path`"))?;
    let threads = thread_count(&args, &cfg)?;
    if threads == Some(0) {
        return Err(CliError::usage("thread count must be >= 1"));
    }
    cfg.threads = threads;
    cfg.validate()?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError {
            kind: "threads",
            message: e.to_string(),
            code: 1,
        })?;
    }

    let hash = cfg.hash();
    let started = Instant::now();
    let output = commands::run(&cfg)?;
    let wall_time = started.elapsed().as_secs_f64();

    let mut csv =
        format!("# threshold-lab {VERSION}\n# command={}\n# config_sha256={hash}\n", cfg.command.name()).into_bytes();
    for note in &output.notes {
        writeln!(csv, "# {note}")?;
    }
    csv.extend_from_slice(&output.csv);

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "tool": "threshold-lab",
        "version": VERSION,
        "command": cfg.command.name(),
        "config": cfg,
        "config_sha256": hash,
        "output": out,
        "rows": output.rows,
        "summary": output.summary,
        "wall_time_s": wall_time,
        "timestamp_unix": timestamp,
    });
    let manifest = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");

    write_atomic(&out, &csv)?;
    write_atomic(&manifest_path(&out), &manifest)?;
    Ok(out)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::usage(e.to_string().trim().to_string());
            eprintln!("{}", json!({ "error": { "kind": err.kind, "message": err.message } }));
            return ExitCode::from(err.code);
        }
    };
    match execute(args) {
        Ok(out) => {
            println!("{}", out.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", json!({ "error": { "kind": err.kind, "message": err.message } }));
            ExitCode::from(err.code)
        }
    }
}
