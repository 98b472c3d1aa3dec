//! CSV and JSON writers. Every file carries the experiment config and hashes.
//!
//! Files are written to `<name>.partial` and renamed once complete, so an
//! interrupted run never leaves a file that looks finished.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

pub struct Writer {
    dir: PathBuf,
    command: &'static str,
    config_toml: String,
    config_json: serde_json::Value,
    config_hash: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Writer {
    pub fn new(dir: &Path, command: &'static str, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut json = serde_json::to_value(cfg)?;
        if let Some(map) = json.as_object_mut() {
            map.remove("output");
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            config_toml: cfg.experiment_toml()?,
            config_json: json,
            config_hash: cfg.experiment_hash()?,
        })
    }

    fn commit(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let partial = self.dir.join(format!("{name}.partial"));
        fs::write(&partial, contents).with_context(|| format!("cannot write {}", partial.display()))?;
        fs::rename(&partial, &path)?;
        Ok(path)
    }

    /// `rows` are already formatted, comma separated, without trailing newline.
    pub fn csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let mut body = String::with_capacity(64 * rows.len() + header.len());
        body.push_str(header);
        body.push('\n');
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        let mut out = format!(
            "# lrcone {}\n# config_sha256: {}\n# body_sha256: {}\n# config:\n",
            self.command,
            self.config_hash,
            sha256_hex(body.as_bytes())
        );
        for line in self.config_toml.lines() {
            out.push_str("#   ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&body);
        self.commit(name, &out)
    }

    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf> {
        let result = serde_json::to_value(result)?;
        let result_hash = sha256_hex(serde_json::to_string(&result)?.as_bytes());
        let doc = serde_json::json!({
            "command": self.command,
            "config": self.config_json,
            "config_sha256": self.config_hash,
            "result_sha256": result_hash,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.commit(name, &text)
    }
}

/// Comma-joined row from display-formatted cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),+ $(,)?) => {
        [$(format!("{}", $cell)),+].join(",")
    };
}
