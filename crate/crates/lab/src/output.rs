//! Write-once output files. CSV numbers carry 17 significant digits; every
//! file embeds the format version and the full run configuration.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::FORMAT_VERSION;
use crate::error::LabError;

/// Round-trip exact decimal for an f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutputDir {
    root: PathBuf,
    config: Value,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, config: Value) -> Result<Self, LabError> {
        std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Fails if the file exists: runs never overwrite earlier outputs.
    fn open(&mut self, name: &str) -> Result<File, LabError> {
        let path = self.root.join(name);
        let file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| LabError::io(&path, e))?;
        self.written.push(path);
        Ok(file)
    }

    pub fn write_json(&mut self, name: &str, body: Value) -> Result<(), LabError> {
        let doc = json!({ "format_version": FORMAT_VERSION, "config": self.config, "result": body });
        let mut f = self.open(name)?;
        let path = self.root.join(name);
        serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| LabError::io(&path, e.into()))?;
        writeln!(f).map_err(|e| LabError::io(&path, e))
    }

    /// `#`-prefixed header lines, then a regular CSV table.
    pub fn write_csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
        let path = self.root.join(name);
        let mut f = self.open(name)?;
        let io = |e: std::io::Error| LabError::io(&path, e);
        writeln!(f, "# format_version={FORMAT_VERSION}").map_err(io)?;
        writeln!(f, "# config={}", self.config).map_err(io)?;
        let mut w = csv::Writer::from_writer(f);
        let csv_err = |e: csv::Error| LabError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        w.write_record(columns).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn files_are_write_once() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), json!({"k": 1})).unwrap();
        out.write_csv("a.csv", &["x"], &[vec![num(1.5)]]).unwrap();
        assert!(out.write_csv("a.csv", &["x"], &[]).is_err());
        let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert!(text.starts_with("# format_version=1\n# config={\"k\":1}\nx\n"));
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let row = rdr.records().next().unwrap().unwrap();
        assert_eq!(row[0].parse::<f64>().unwrap(), 1.5);
    }
}
