//! Model files and run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, TrawlFunctionSpec};
use crate::measures::table::parse_two_column_csv;
use crate::measures::LevyMeasureSpec;
use crate::simulate::{Model, ModelSpec};

/// Parse model TOML. Table `path`s are left unresolved.
pub fn parse_model(text: &str) -> Result<ModelSpec> {
    toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string() + &span_note(text, e.span())))
}

fn span_note(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) if r.start <= text.len() => {
            let line = text[..r.start].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        _ => String::new(),
    }
}

/// Replace table `path`s with their rows, reading files relative to `base`.
pub fn resolve_tables(spec: &mut ModelSpec, base: &Path) -> Result<()> {
    let read = |p: &str, key: &str| -> Result<Vec<[f64; 2]>> {
        let full = base.join(p);
        let text = std::fs::read_to_string(&full).map_err(|e| Error::invalid(key, format!("cannot read {}: {e}", full.display())))?;
        parse_two_column_csv(&text, key)
    };
    if let LevyMeasureSpec::Tabulated { points, path: Some(p), .. } = &mut spec.levy {
        if points.is_empty() {
            *points = read(p, "levy.path")?;
        }
    }
    if let KernelSpec::Trawl { psi: TrawlFunctionSpec::Table { points, path: Some(p) } } = &mut spec.kernel {
        if points.is_empty() {
            *points = read(p, "kernel.psi.path")?;
        }
    }
    Ok(())
}

/// Read, resolve and validate a model file.
pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::invalid("model", format!("cannot read {}: {e}", path.display())))?;
    let mut spec = parse_model(&text)?;
    resolve_tables(&mut spec, path.parent().unwrap_or(Path::new(".")))?;
    spec.build()
}

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: u64,
    /// FNV-1a of the contents, hex.
    pub fnv1a: String,
}

impl Artifact {
    pub fn of(path: &Path, contents: &[u8]) -> Artifact {
        Artifact { path: path.to_path_buf(), bytes: contents.len() as u64, fnv1a: format!("{:016x}", fnv1a(contents)) }
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Everything needed to repeat a run: the command, its fully resolved
/// options and the model with tables inlined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub options: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    pub artifacts: Vec<Artifact>,
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
}

/// Write `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::invalid("out", format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::invalid("out", format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}
