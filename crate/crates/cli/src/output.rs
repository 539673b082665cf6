//! Output directory bookkeeping and run manifests.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// SHA-256 of the effective configuration as JSON.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub started: String,
    pub finished: String,
    pub status: String,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
}

/// Every file a command writes goes through here, so the manifest can list
/// all of them.
pub struct Outputs {
    dir: PathBuf,
    command: String,
    config: serde_json::Value,
    started: String,
    files: Vec<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Outputs {
    pub fn create(dir: &Path, command: &str, config: &impl Serialize) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
        let config = serde_json::to_value(config).map_err(Failure::usage)?;
        Ok(Self { dir: dir.to_path_buf(), command: command.into(), config, started: now(), files: Vec::new() })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<(), Failure> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        self.record(rel);
        Ok(())
    }

    /// Note a file written by someone else.
    pub fn record(&mut self, rel: &str) {
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.to_string());
        }
    }

    pub fn finish(mut self, status: &str) -> Result<RunManifest, Failure> {
        self.files.sort();
        let canonical = serde_json::to_string(&self.config).map_err(Failure::usage)?;
        let config_hash = Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            config: self.config,
            started: self.started,
            finished: now(),
            status: status.to_string(),
            outputs: self.files,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(Failure::usage)?;
        std::fs::write(self.dir.join("manifest.json"), json + "\n")?;
        Ok(manifest)
    }
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes; `NaN` and infinities as words.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV field, quoted when needed.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_quoted_only_when_needed() {
        assert_eq!(field("plain"), "plain");
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1e-300, -2.5e17, 1.0 / 3.0, 1.0102252367971687e-11, 5e-324] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x, "{}", num(x));
            assert!(num(x).len() <= 24);
        }
    }

    #[test]
    fn manifest_lists_each_file_once() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::create(dir.path(), "test", &serde_json::json!({"a": 1})).unwrap();
        out.write("b.csv", "x\n").unwrap();
        out.write("sub/a.csv", "y\n").unwrap();
        out.write("b.csv", "z\n").unwrap();
        let m = out.finish("ok").unwrap();
        assert_eq!(m.outputs, vec!["b.csv", "sub/a.csv"]);
        assert_eq!(m.config_hash.len(), 64);
        let again = Outputs::create(dir.path(), "test", &serde_json::json!({"a": 1})).unwrap().finish("ok").unwrap();
        assert_eq!(again.config_hash, m.config_hash);
        assert!(dir.path().join("manifest.json").exists());
    }
}
