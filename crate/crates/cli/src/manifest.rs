use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub j_min: f64,
    pub j_max: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub grid: Option<GridSpec>,
    /// Ring lengths standing in for the infinite chain, when used.
    pub l_ff: Option<serde_json::Value>,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Collects files written by one command and records them in a manifest.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
    started: Instant,
    started_unix: u64,
}

impl Outputs {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), started: Instant::now(), started_unix })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(OutputFile { file: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(path)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        self,
        name: &str,
        argv: &[String],
        parameters: serde_json::Value,
        seed: Option<u64>,
        grid: Option<GridSpec>,
        l_ff: Option<serde_json::Value>,
    ) -> anyhow::Result<PathBuf> {
        let manifest = RunManifest {
            tool: "entcorr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: argv.to_vec(),
            parameters,
            seed,
            grid,
            l_ff,
            threads: rayon::current_num_threads(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.files,
        };
        let path = self.dir.join(format!("{name}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> anyhow::Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
