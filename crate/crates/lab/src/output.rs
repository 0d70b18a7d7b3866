//! File outputs of a run.
//!
//! CSV bodies are deterministic; unless the run is reproducible each CSV
//! starts with one `#` comment line carrying a timestamp. Files written by a
//! run that later fails are removed again.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::LabError;

pub struct OutputSink {
    dir: Option<PathBuf>,
    reproducible: bool,
    written: Vec<PathBuf>,
}

impl OutputSink {
    pub fn new(dir: Option<&Path>, reproducible: bool) -> Result<Self, LabError> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            reproducible,
            written: Vec::new(),
        })
    }

    /// A sink that discards everything.
    pub fn discard() -> Self {
        Self {
            dir: None,
            reproducible: true,
            written: Vec::new(),
        }
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    fn path(&mut self, name: &str) -> Option<PathBuf> {
        let p = self.dir.as_ref()?.join(name);
        self.written.push(p.clone());
        Some(p)
    }

    /// Writes `rows` under `header`.
    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<(), LabError> {
        let reproducible = self.reproducible;
        let Some(path) = self.path(name) else {
            return Ok(());
        };
        let mut file = BufWriter::new(File::create(&path)?);
        if !reproducible {
            writeln!(file, "# generated {}", chrono::Utc::now().to_rfc3339())?;
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        let Some(path) = self.path(name) else {
            return Ok(());
        };
        let mut file = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, value)?;
        writeln!(file)?;
        file.flush()?;
        Ok(())
    }

    /// Whitespace-separated columns for gnuplot.
    pub fn dat(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), LabError> {
        let Some(path) = self.path(name) else {
            return Ok(());
        };
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "# {}", columns.join(" "))?;
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(file, "{}", line.join(" "))?;
        }
        file.flush()?;
        Ok(())
    }

    /// Removes everything written so far.
    pub fn cleanup(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}
