//! Serialization helpers: 12-significant-digit numbers, output files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use bosim::experiments::ExperimentConfig;
use serde_json::{json, Map, Value};

use crate::CliError;

/// `x` rounded to 12 significant digits; tiny round-off below 1e−15 becomes 0.
pub fn sig12(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn num(x: f64) -> Value {
    Value::from(sig12(x))
}

/// CSV cell for a number with at most 12 significant digits.
pub fn cell(x: f64) -> String {
    sig12(x).to_string()
}

pub fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

/// Collects the files written by one command, then the manifest describing them.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        println!("{}", path.display());
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes manifest.json; `extra` adds command-specific fields.
    pub fn finish(mut self, command: &str, config: &ExperimentConfig, extra: Map<String, Value>) -> Result<(), CliError> {
        let mut manifest = json!({
            "tool": "bosim",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": rounded(serde_json::to_value(config).expect("configs serialize")),
            "seed": config.seed,
            "shots": config.shots,
            "synthesis": config.synthesis.to_string(),
            "outputs": self.written,
        });
        manifest.as_object_mut().expect("object").extend(extra);
        self.written = Vec::new();
        self.write("manifest.json", &pretty(&manifest))
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn rounded(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64")),
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

/// Reads a configuration file; a manifest is accepted and its embedded config used.
pub fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let inner = match value.get("tool").and_then(Value::as_str) {
        Some("bosim") => value.get("config").cloned().ok_or_else(|| CliError::Usage("manifest has no config".into()))?,
        _ => value,
    };
    Ok(ExperimentConfig::from_json(&inner.to_string())?)
}
