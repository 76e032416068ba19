//! Run directory writer. Every file of a run goes through one [`RunWriter`],
//! which lists it in `manifest.json` when the run finishes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST: &str = "manifest.json";

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format_float(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct FileEntry {
    name: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    config: String,
    files: Vec<FileEntry>,
    /// Excluded from reproducibility comparisons.
    wall_clock_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct RunWriter {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl RunWriter {
    /// Opens `dir`, removing the files a previous run listed there.
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let old = dir.join(MANIFEST);
        if let Ok(text) = fs::read_to_string(&old) {
            if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
                for f in v["files"].as_array().into_iter().flatten() {
                    if let Some(name) = f["name"].as_str() {
                        // Names are plain file names written by this tool.
                        if !name.contains('/') && !name.contains("..") {
                            let _ = fs::remove_file(dir.join(name));
                        }
                    }
                }
            }
            let _ = fs::remove_file(old);
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        assert!(
            !self.files.iter().any(|f| f == name),
            "{name} written twice"
        );
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// RFC 4180 CSV with CRLF line ends.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<Cell>>,
    ) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.put(name, &bytes)
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<()> {
        let mut out = String::new();
        for r in records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        self.put(name, out.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.put(name, text.as_bytes())
    }

    /// Writes `manifest.json` and returns its path.
    pub fn finish(self, command: &str, cfg: &ExperimentConfig) -> Result<PathBuf> {
        let config = cfg.resolved_toml();
        let mut files = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let bytes = fs::read(self.dir.join(name))?;
            files.push(FileEntry {
                name: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = Manifest {
            artifact: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: sha256_hex(config.as_bytes()),
            config,
            files,
            wall_clock_s: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn csv_is_rfc4180() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = RunWriter::create(dir.path()).unwrap();
        w.csv(
            "t.csv",
            &["a", "b"],
            vec![vec![Cell::from(1.5), Cell::from("x,\"y\"")]],
        )
        .unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "a,b\r\n1.5000000000000000e0,\"x,\"\"y\"\"\"\r\n");
    }

    #[test]
    fn stale_files_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::parse("[domain]\ndim = 1\ncells = 8\n").unwrap();
        let mut w = RunWriter::create(dir.path()).unwrap();
        w.text("old.txt", "x").unwrap();
        w.finish("eigen", &cfg).unwrap();
        let w = RunWriter::create(dir.path()).unwrap();
        w.finish("eigen", &cfg).unwrap();
        assert!(!dir.path().join("old.txt").exists());
    }
}
