//! JSON run reports and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub spec: String,
    pub kind: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub objective: Option<f64>,
    pub optimality: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The subcommand and its arguments, as given.
    pub command: Vec<String>,
    pub input: Option<InputEcho>,
    pub degree: Option<usize>,
    pub path: Option<String>,
    pub l1_error: Option<f64>,
    pub linf_error: Option<f64>,
    pub near_best_factor: Option<f64>,
    pub optimality: Option<f64>,
    pub exact: Option<bool>,
    pub k: Option<usize>,
    pub omega_measure: Option<f64>,
    pub trace: Vec<TracePoint>,
    pub version: String,
    /// `ok` or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    /// Command-specific fields.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            command,
            input: None,
            degree: None,
            path: None,
            l1_error: None,
            linf_error: None,
            near_best_factor: None,
            optimality: None,
            exact: None,
            k: None,
            omega_measure: None,
            trace: Vec::new(),
            version: VERSION.to_string(),
            status: "ok".into(),
            error: None,
            timestamp: None,
            elapsed_ms: None,
            extra: Map::new(),
        }
    }

    /// Add a command-specific field. Non-finite numbers become `null`.
    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.extra.insert(key.to_string(), v);
    }

    pub fn stamp(&mut self, elapsed_ms: f64) {
        self.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self.elapsed_ms = Some(elapsed_ms);
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// `Some(x)` when finite.
pub fn fin(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = RunReport::new(vec!["rip".into(), "--N".into(), "11".into()]);
        r.degree = Some(3);
        r.l1_error = fin(0.25);
        r.trace.push(TracePoint {
            iter: 0,
            objective: Some(1.5),
            optimality: Some(1e-3),
        });
        r.set("delta", 4.0 / 13.0);
        r.set("sufficient", true);
        let text = r.to_json().unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn non_finite_values_become_null() {
        let mut r = RunReport::new(vec![]);
        r.l1_error = fin(f64::NAN);
        r.set("bound", f64::INFINITY);
        let v: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(v["l1_error"].is_null());
        assert!(v["bound"].is_null());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
