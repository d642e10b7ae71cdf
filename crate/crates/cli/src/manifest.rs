use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use serde::Serialize;

use rngperc::io::{self, FORMAT_VERSION};

#[derive(Debug, Serialize)]
pub struct OutputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub parameters: serde_json::Value,
    pub master_seed: Option<u64>,
    pub tool_version: &'static str,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputHash>,
}

/// Collects every file a command writes, then writes the manifest last.
pub struct Outputs {
    started: Instant,
    primary: PathBuf,
    written: Vec<OutputHash>,
}

impl Outputs {
    pub fn new(primary: &Path) -> Self {
        Self {
            started: Instant::now(),
            primary: primary.to_path_buf(),
            written: Vec::new(),
        }
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        io::write_atomic(path, bytes)?;
        self.written.push(OutputHash {
            path: path.display().to_string(),
            sha256: io::sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_primary(&mut self, bytes: &[u8]) -> Result<()> {
        let p = self.primary.clone();
        self.write(&p, bytes)
    }

    pub fn finish(self, command: &str, parameters: serde_json::Value, master_seed: Option<u64>) -> Result<()> {
        let manifest = RunManifest {
            format_version: FORMAT_VERSION,
            command: command.to_string(),
            parameters,
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.written,
        };
        let path = manifest_path(&self.primary);
        io::write_atomic(&path, (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())?;
        Ok(())
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn report_error(kind: &str, err: &anyhow::Error) -> ExitCode {
    let body = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "error": format!("{err:#}"),
    });
    eprintln!("{body}");
    ExitCode::from(if kind == "usage" { 2 } else { 1 })
}
