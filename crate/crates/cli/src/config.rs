//! Flat key-value run configuration: a text file of `key = value` lines
//! (# comments allowed) merged with `--set key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{anyhow, Context, Result};

use nestperc::netmodels::Params;

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Config::default();
        for (lineno, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            cfg.values
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<()> {
        for s in sets {
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("--set needs key=value, got {s:?}"))?;
            self.values
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self
            .values
            .get(key)
            .ok_or_else(|| anyhow!("missing required config key {key:?}"))?;
        raw.parse()
            .map_err(|e| anyhow!("config key {key:?} = {raw:?}: {e}"))
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow!("config key {key:?} = {raw:?}: {e}")),
        }
    }

    /// Comma-separated list value.
    pub fn get_list<T>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: std::str::FromStr + Clone,
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse()
                        .map_err(|e| anyhow!("config key {key:?} item {tok:?}: {e}"))
                })
                .collect(),
        }
    }

    /// Model parameters from the common keys; `alpha` is always required,
    /// the rest default to the documented values.
    pub fn params(&self, require_all: bool) -> Result<Params> {
        let d: u32 = self.get_or("d", 2)?;
        let z: i64 = self.get_or("z", 2)?;
        let alpha: f64 = self.require("alpha")?;
        let (rho, p) = if require_all {
            (self.require("rho")?, self.require("p")?)
        } else {
            (self.get_or("rho", 0.5)?, self.get_or("p", 0.5)?)
        };
        let mut params = Params::new(d, z, alpha, rho, p).map_err(precondition)?;
        if let Some(delta) = self.values.get("delta") {
            let delta: f64 = delta
                .parse()
                .map_err(|e| anyhow!("config key \"delta\": {e}"))?;
            params = params.with_delta(delta).map_err(precondition)?;
        }
        Ok(params)
    }

    pub fn seed(&self) -> Result<u64> {
        self.get_or("seed", 1)
    }

    /// Render as a config-file body (re-usable via --config).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Marker wrapper so main() can map parameter precondition violations to
/// their dedicated exit status.
pub fn precondition(err: nestperc::Error) -> anyhow::Error {
    anyhow!("precondition violated: {err}")
}

pub fn is_precondition(err: &anyhow::Error) -> bool {
    err.to_string().starts_with("precondition violated")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let dir = std::env::temp_dir().join(format!("cfg-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "# comment\nalpha = 2.0\nL = 64\nseed = 7\n").unwrap();
        let mut cfg = Config::from_file(&path).unwrap();
        cfg.apply_overrides(&["L=128".to_string(), "rho=0.25".to_string()])
            .unwrap();
        assert_eq!(cfg.require::<i64>("L").unwrap(), 128);
        assert_eq!(cfg.require::<f64>("rho").unwrap(), 0.25);
        assert_eq!(cfg.seed().unwrap(), 7);
        let p = cfg.params(false).unwrap();
        assert_eq!(p.alpha, 2.0);
        assert!(cfg.require::<f64>("nope").is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rendered_config_reparses() {
        let mut cfg = Config::default();
        cfg.set("alpha", 1.5);
        cfg.set("L", 32);
        let dir = std::env::temp_dir().join(format!("cfg-test2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.cfg");
        std::fs::write(&path, cfg.render()).unwrap();
        let again = Config::from_file(&path).unwrap();
        assert_eq!(again.require::<f64>("alpha").unwrap(), 1.5);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
