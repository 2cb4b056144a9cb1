use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliResult};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

/// Everything needed to reproduce a run. Written before numeric work starts
/// and rewritten with timings and artifacts when the run ends.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
    pub phases: Vec<Phase>,
    #[serde(skip)]
    dir: PathBuf,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

impl RunManifest {
    pub fn new(command: &str, dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: BTreeMap::new(),
            inputs: Vec::new(),
            seed: None,
            artifacts: Vec::new(),
            phases: Vec::new(),
            dir: dir.to_path_buf(),
            clock: None,
        })
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> CliResult {
        self.config.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> CliResult {
        let bytes = fs::read(path).map_err(io_err(path))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// Path of an artifact in the output directory, recorded in the manifest.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    /// Close the running phase (if any) and start `name`.
    pub fn phase(&mut self, name: &str) {
        self.end_phase();
        self.clock = Some((name.to_string(), Instant::now()));
    }

    fn end_phase(&mut self) {
        if let Some((name, t)) = self.clock.take() {
            self.phases.push(Phase {
                name,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    }

    pub fn write(&self) -> CliResult {
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }

    pub fn finish(mut self) -> CliResult {
        self.end_phase();
        self.write()
    }
}
