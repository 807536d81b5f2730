//! Files produced by a scenario. Everything is rendered to bytes first so
//! that runs can be compared without touching the filesystem.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(OutputFile {
            name: name.to_string(),
            bytes,
        })
    }

    /// CSV with a header row. Floats use the shortest round-trip form.
    pub fn csv(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Serialize(e.to_string()))?;
        Ok(OutputFile {
            name: name.to_string(),
            bytes,
        })
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.bytes).map_err(io(&path))?;
    }
    Ok(())
}
