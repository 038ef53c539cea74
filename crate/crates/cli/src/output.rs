//! Artifact writers. Every CSV starts with a provenance comment and a header.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Output {
    dir: PathBuf,
    provenance: String,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config_sha256: &'a str,
    results: &'a T,
}

impl Output {
    pub fn new(dir: &Path, digest: &str) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), provenance: digest.to_string() })
    }

    fn create(&self, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok((path, BufWriter::new(file)))
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let (path, mut w) = self.create(name)?;
        writeln!(w, "# bittery {VERSION} config-sha256={}", self.provenance)
            .map_err(|source| CliError::Write { path: path.clone(), source })?;
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        writer.flush().map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, results: &T) -> CliResult<PathBuf> {
        let (path, mut w) = self.create(name)?;
        let doc = Document { tool: "bittery", version: VERSION, config_sha256: &self.provenance, results };
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Failed(format!("json output: {e}")))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok(path)
    }
}
