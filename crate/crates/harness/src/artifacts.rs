//! Output files. CSVs hold only values derived from the config and seeds, so
//! they are byte-identical across repeated runs; wall time goes to the JSON
//! summary only.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fsi_core::inequality::{LabRecord, DRIFT_NOTE};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

/// Git-style content hash: `sha256("blob <len>\0" ++ bytes)`, hex encoded.
pub fn artifact_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest round-trip representation; `nan`/`inf` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        format!("{x}").to_lowercase()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes files under one output directory and remembers their names.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(root).map_err(|e| HarnessError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// CSV with a header row; `comment` lines go first, prefixed with `# `.
    pub fn write_csv(&mut self, name: &str, comment: &[&str], header: &[&str], rows: &[Vec<String>]) -> Result<(), HarnessError> {
        let mut buf = Vec::new();
        for c in comment {
            writeln!(buf, "# {c}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        self.write_bytes(name, &buf)
    }

    /// `(test-id, params, LHS, RHS, ratio)` with the drift note on top.
    pub fn write_lab_csv(&mut self, name: &str, records: &[LabRecord]) -> Result<(), HarnessError> {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.test_id.clone(),
                    r.params.clone(),
                    fmt_f64(r.lhs),
                    fmt_f64(r.rhs),
                    r.ratio.map(fmt_f64).unwrap_or_else(|| "skip".into()),
                ]
            })
            .collect();
        self.write_csv(name, &[DRIFT_NOTE], &["test_id", "params", "lhs", "rhs", "ratio"], &rows)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), HarnessError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))?;
        if !self.written.iter().any(|n| n == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }
}
