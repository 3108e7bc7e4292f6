use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mma_core::config::{self, Artifact, Manifest};
use mma_core::Error;

mod commands;

pub const OUT_DIR_ENV: &str = "MMA_LAB_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "mma-lab", version, about = "Condition checks, rate classification and path simulation for integrated MMA processes")]
struct Cli {
    /// Worker threads for simulation; results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize, Args)]
pub struct Io {
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
    /// Output file; stdout when omitted. Relative paths go under $MMA_LAB_OUT_DIR when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Growth exponent of the centered running maximum.
    Mz,
    /// Law of the iterated logarithm statistic.
    Lil,
}

#[derive(Debug, Clone, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate the integrability condition at one γ.
    Check {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
        #[arg(long)]
        gamma: f64,
    },
    /// Indices and the predicted growth rate 1/γ.
    Classify {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
    },
    /// Existence of the integrated process.
    Existence {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
    },
    /// Fubini conditions and the mean.
    Fubini {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
    },
    /// The indices α, β and η.
    Indices {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
        /// Use divergence scans instead of closed forms.
        #[arg(long)]
        numeric: bool,
    },
    /// Simulate paths of X*.
    Simulate {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1)]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        points_per_decade: Option<usize>,
    },
    /// Growth-exponent or LIL experiment.
    Experiment {
        #[command(flatten)]
        #[serde(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        kind: Option<ExperimentKind>,
        #[arg(long, default_value_t = 200)]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 20)]
        points_per_decade: usize,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Re-run a manifest and compare its artifacts byte for byte.
    #[serde(skip)]
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Also write the regenerated artifacts here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Classify { .. } => "classify",
            Command::Existence { .. } => "existence",
            Command::Fubini { .. } => "fubini",
            Command::Indices { .. } => "indices",
            Command::Simulate { .. } => "simulate",
            Command::Experiment { .. } => "experiment",
            Command::Replay { .. } => "replay",
        }
    }

    fn io(&self) -> Option<&Io> {
        match self {
            Command::Check { io, .. }
            | Command::Classify { io }
            | Command::Existence { io }
            | Command::Fubini { io }
            | Command::Indices { io, .. }
            | Command::Simulate { io, .. }
            | Command::Experiment { io, .. } => Some(io),
            Command::Replay { .. } => None,
        }
    }
}

/// Exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Usage = 1,
    ConditionFailed = 2,
    Numerical = 3,
}

pub fn status_of(e: &Error) -> Status {
    match e {
        Error::Invalid { .. } | Error::Parse(_) | Error::Unsupported(_) => Status::Usage,
        Error::Divergent { .. } | Error::Degenerate(_) => Status::ConditionFailed,
        Error::Numerical(_) => Status::Numerical,
    }
}

/// Result of one command before anything is written.
pub struct Outcome {
    pub primary: Vec<u8>,
    /// `(suffix, contents)` written next to `--out` as `<stem><suffix>`.
    pub extras: Vec<(&'static str, Vec<u8>)>,
    pub status: Status,
    /// The resolved command, with defaults filled in, for the manifest.
    pub resolved: Command,
    pub model: Option<mma_core::simulate::ModelSpec>,
}

fn error_body(e: &Error) -> String {
    let kind = match e {
        Error::Invalid { .. } => "invalid",
        Error::Divergent { .. } => "divergent",
        Error::Unsupported(_) => "unsupported",
        Error::Numerical(_) => "numerical",
        Error::Parse(_) => "parse",
        Error::Degenerate(_) => "degenerate",
    };
    let key = match e {
        Error::Invalid { key, .. } => Some(key.as_str()),
        _ => None,
    };
    let v = serde_json::json!({ "error": { "kind": kind, "key": key, "message": e.to_string() } });
    serde_json::to_string(&v).unwrap()
}

pub fn out_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn manifest_path(out: &Path) -> PathBuf {
    let name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{name}.manifest.json"))
}

fn stdout(bytes: &[u8]) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::invalid("out", format!("writing stdout: {e}"))),
        _ => Ok(()),
    }
}

/// Writes the outcome of a command and its manifest.
fn emit(outcome: &Outcome) -> Result<(), Error> {
    let Some(io) = outcome.resolved.io() else {
        return stdout(&outcome.primary);
    };
    let Some(out) = &io.out else {
        // stdout runs carry their manifest inline
        return match serde_json::from_slice::<serde_json::Value>(&outcome.primary) {
            Ok(serde_json::Value::Object(mut map)) => {
                let manifest = build_manifest(outcome, Vec::new());
                map.insert("manifest".into(), serde_json::to_value(manifest).map_err(|e| Error::Numerical(e.to_string()))?);
                let mut text = serde_json::to_vec_pretty(&map).map_err(|e| Error::Numerical(e.to_string()))?;
                text.push(b'\n');
                stdout(&text)
            }
            _ => stdout(&outcome.primary),
        };
    };
    let out = out_path(out);
    config::write_atomic(&out, &outcome.primary)?;
    let mut artifacts = vec![Artifact::of(&out, &outcome.primary)];
    for (suffix, bytes) in &outcome.extras {
        let p = sibling(&out, suffix);
        config::write_atomic(&p, bytes)?;
        artifacts.push(Artifact::of(&p, bytes));
    }
    let manifest = build_manifest(outcome, artifacts);
    let text = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Numerical(e.to_string()))?;
    config::write_atomic(&manifest_path(&out), &text)
}

fn build_manifest(outcome: &Outcome, artifacts: Vec<Artifact>) -> Manifest {
    let options = serde_json::to_value(&outcome.resolved).unwrap();
    Manifest {
        tool: "mma-lab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: outcome.resolved.name().into(),
        options,
        model: outcome.model.clone(),
        artifacts,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Replay { manifest, out_dir } => commands::replay(manifest, out_dir.as_deref(), cli.workers),
        cmd => commands::run(cmd.clone(), None, cli.workers),
    };
    match result.and_then(|o| emit(&o).map(|_| o.status)) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("{}", error_body(&e));
            ExitCode::from(status_of(&e) as u8)
        }
    }
}
