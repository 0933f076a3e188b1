//! Run directories, CSV tables and manifests.

use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::Value;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// One CSV cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format!("{v:.16e}"),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// A scalar check recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Passing means `value < tolerance` unless stated otherwise.
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
            passed: value < tolerance,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            value: if passed { 1.0 } else { 0.0 },
            tolerance: None,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: &'static str,
}

impl Axis {
    pub fn linear(name: &str, min: f64, max: f64, count: usize) -> Self {
        Axis {
            name: name.to_string(),
            min,
            max,
            count,
            scale: "linear",
        }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + h * i as f64).collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count.max(2) - 1) as f64
    }
}

/// Description of a gridded CSV file; values are row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridData {
    pub file: String,
    pub figure: String,
    pub axes: Vec<Axis>,
    pub value: String,
    pub metadata: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub run_id: String,
    pub version: String,
    pub started_unix_ms: u128,
    pub wall_clock_seconds: f64,
    pub status: String,
    pub exit_code: i32,
    pub failure: Option<Failure>,
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub grids: Vec<GridData>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
    pub report: Value,
}

/// A fresh directory `<out>/<command>-<unix ms>` and the files written into it.
pub struct RunDir {
    pub path: PathBuf,
    pub run_id: String,
    pub started_unix_ms: u128,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(out: &Path, command: &str) -> Result<Self> {
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
        let base = format!("{command}-{started_unix_ms}");
        for k in 0..1000 {
            let run_id = if k == 0 {
                base.clone()
            } else {
                format!("{base}-{k}")
            };
            let path = out.join(&run_id);
            match fs::create_dir(&path) {
                Ok(()) => {
                    return Ok(RunDir {
                        path,
                        run_id,
                        started_unix_ms,
                        files: Vec::new(),
                    })
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(io_error(&path, e)),
            }
        }
        Err(Error::invalid(format!(
            "could not allocate a run directory under {}",
            out.display()
        )))
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes a header row and data rows with LF line endings.
    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<Cell>>,
    {
        let path = self.path.join(name);
        let file = new_file(&path)?;
        let mut w = BufWriter::new(file);
        let mut put = |line: String| w.write_all(line.as_bytes()).map_err(|e| io_error(&path, e));
        put(header.join(",") + "\n")?;
        for row in rows {
            if row.len() != header.len() {
                return Err(Error::invalid(format!(
                    "{name}: row has {} cells, header {}",
                    row.len(),
                    header.len()
                )));
            }
            let line: Vec<String> = row.iter().map(format_cell).collect();
            put(line.join(",") + "\n")?;
        }
        w.flush().map_err(|e| io_error(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<PathBuf> {
        let path = self.path.join("manifest.json");
        let mut f = new_file(&path)?;
        let text =
            serde_json::to_string_pretty(manifest).map_err(|e| Error::invalid(e.to_string()))?;
        f.write_all(text.as_bytes())
            .and_then(|_| f.write_all(b"\n"))
            .map_err(|e| io_error(&path, e))?;
        Ok(path)
    }
}

fn new_file(path: &Path) -> Result<File> {
    OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::invalid(format!("{}: {e}", path.display()))
}
