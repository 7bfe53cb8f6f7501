use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

pub const MANIFEST: &str = "config.json";

/// Output directory bound to one resolved config hash.
pub struct RunDir {
    root: PathBuf,
    hash: String,
}

impl RunDir {
    /// Claim `root` for a run. A directory that holds another config's
    /// artifacts is only reused with `force`.
    pub fn claim(root: &Path, canonical: &Value, hash: &str, force: bool) -> Result<Self, CliError> {
        let manifest = root.join(MANIFEST);
        if manifest.exists() {
            let text = fs::read_to_string(&manifest).map_err(|e| CliError::io("reading manifest", e))?;
            let previous = serde_json::from_str::<Value>(&text)
                .ok()
                .and_then(|v| v.get("config_hash").and_then(Value::as_str).map(str::to_owned));
            if previous.as_deref() != Some(hash) && !force {
                return Err(CliError::config(format!(
                    "{} holds results for config hash {}, this run has {hash}; pass --force to overwrite",
                    root.display(),
                    previous.unwrap_or_else(|| "<unreadable>".into())
                )));
            }
        } else if root.is_dir() && !force {
            let mut entries = fs::read_dir(root).map_err(|e| CliError::io("listing output directory", e))?;
            if entries.next().is_some() {
                return Err(CliError::config(format!(
                    "{} is not empty and has no {MANIFEST}; pass --force to write into it",
                    root.display()
                )));
            }
        }
        fs::create_dir_all(root).map_err(|e| CliError::io(&format!("creating {}", root.display()), e))?;
        let dir = Self { root: root.to_path_buf(), hash: hash.to_string() };
        dir.write_json(MANIFEST, json!({ "config": canonical }))?;
        Ok(dir)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Write through a temporary sibling and rename into place.
    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.path(name);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io("creating output subdirectory", e))?;
        }
        let file_name = target.file_name().and_then(|s| s.to_str()).unwrap_or("artifact");
        let tmp = target.with_file_name(format!(".{file_name}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| CliError::io(&format!("writing {}", tmp.display()), e))?;
        fs::rename(&tmp, &target).map_err(|e| CliError::io(&format!("renaming into {}", target.display()), e))
    }

    pub fn write_json(&self, name: &str, mut value: Value) -> Result<(), CliError> {
        if let Value::Object(m) = &mut value {
            m.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::config(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// `body` starts with the `# schema=1` line; the hash goes right after it.
    pub fn write_csv(&self, name: &str, body: &[u8]) -> Result<(), CliError> {
        let split = body.iter().position(|&b| b == b'\n').map_or(body.len(), |i| i + 1);
        let mut out = Vec::with_capacity(body.len() + 80);
        out.extend_from_slice(&body[..split]);
        out.extend_from_slice(format!("# config_hash={}\n", self.hash).as_bytes());
        out.extend_from_slice(&body[split..]);
        self.write_bytes(name, &out)
    }
}
