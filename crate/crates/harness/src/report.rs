//! Result files: CSV data plus a JSON run summary.
//!
//! Floats print with Rust's shortest round-trip formatting, so files are
//! byte-stable across reruns with the same config and seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Compile-time `git describe` tag of this binary.
pub fn build_tag() -> &'static str {
    env!("BEAMLAB_BUILD")
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub rows: usize,
}

/// Write one CSV with a declared header; returns the row count for the
/// summary so consumers can cross-check file shape.
pub fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> Result<OutputFile> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "{header}").map_err(Error::from)?;
    for row in rows {
        debug_assert_eq!(
            row.matches(',').count(),
            header.matches(',').count(),
            "row column count must match header: {row}"
        );
        writeln!(f, "{row}").map_err(Error::from)?;
    }
    f.flush().map_err(Error::from)?;
    Ok(OutputFile {
        name: name.to_string(),
        rows: rows.len(),
    })
}

pub fn write_lines(dir: &Path, name: &str, lines: &[String]) -> Result<OutputFile> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    for line in lines {
        writeln!(f, "{line}").map_err(Error::from)?;
    }
    f.flush().map_err(Error::from)?;
    Ok(OutputFile {
        name: name.to_string(),
        rows: lines.len(),
    })
}

#[derive(Serialize)]
struct RunSummary<'a> {
    command: &'a str,
    build: &'a str,
    seed: u64,
    outputs: &'a [OutputFile],
    metrics: &'a serde_json::Value,
    config: &'a ExperimentConfig,
}

/// Write `<command>_summary.json`: metrics, output inventory, the build tag,
/// and a config echo.
pub fn write_summary(
    dir: &Path,
    command: &str,
    seed: u64,
    cfg: &ExperimentConfig,
    outputs: &[OutputFile],
    metrics: &serde_json::Value,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let summary = RunSummary {
        command,
        build: build_tag(),
        seed,
        outputs,
        metrics,
        config: cfg,
    };
    let path = dir.join(format!("{command}_summary.json"));
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Io(format!("summary serialization: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Format a float with full round-trip precision.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
