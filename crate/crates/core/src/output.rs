//! Number formatting and atomic output staging.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Fixed six-decimal formatting; negative zero prints as zero.
pub fn fmt_f64(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Like [`fmt_f64`], with an empty string for undefined values.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Files rendered in memory and written to the output directory only once
/// every file is ready. Each file goes through a temp file plus rename.
#[derive(Debug, Default)]
pub struct StagedOutputs {
    files: Vec<(String, Vec<u8>)>,
}

impl StagedOutputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: Vec<u8>) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    /// Writes all files into `dir`. If any write fails, nothing that was
    /// staged by this call is left behind.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut temps = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = tempfile::Builder::new()
                .prefix(&format!(".{name}."))
                .suffix(".tmp")
                .tempfile_in(dir)
                .map_err(|e| Error::io(dir, e))?;
            tmp.write_all(contents)
                .map_err(|e| Error::io(tmp.path(), e))?;
            tmp.flush().map_err(|e| Error::io(tmp.path(), e))?;
            temps.push((tmp, dir.join(name)));
        }
        // temp files are deleted on drop if we bail out before persisting
        let mut written = Vec::with_capacity(temps.len());
        for (tmp, target) in temps {
            tmp.persist(&target)
                .map_err(|e| Error::io(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}
