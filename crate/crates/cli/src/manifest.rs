//! Run manifests: every command emits one next to its outputs, holding the
//! fully resolved configuration (the file doubles as a `--config` input),
//! host info, wall time and SHA-256 digests of every written artifact.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::config::Config;

pub struct ManifestBuilder {
    command: String,
    config: Config,
    outputs: Vec<(PathBuf, String)>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &Config) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config: config.clone(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Register a written file; digests are taken immediately.
    pub fn record(&mut self, path: &Path) -> Result<()> {
        let body = std::fs::read(path)
            .with_context(|| format!("digesting output {}", path.display()))?;
        let digest = hex(&Sha256::digest(&body));
        self.outputs.push((path.to_path_buf(), digest));
        Ok(())
    }

    pub fn write(self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.txt");
        let mut body = String::new();
        body.push_str(&format!(
            "# {} run manifest (config section is --config compatible)\n",
            self.command
        ));
        body.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
        body.push_str(&format!("# command: {}\n", self.command));
        body.push_str(&format!(
            "# host: {} ({} cpus)\n",
            std::env::var("HOSTNAME").unwrap_or_else(|_| "unknown".into()),
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(0)
        ));
        body.push_str(&format!(
            "# wall_ms: {}\n",
            self.started.elapsed().as_millis()
        ));
        for (p, digest) in &self.outputs {
            body.push_str(&format!("# output: {} sha256:{}\n", p.display(), digest));
        }
        body.push_str(&self.config.render());
        std::fs::write(&path, body)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
