//! Run manifests: key=value records written next to every CSV so a run can
//! be reproduced exactly. A manifest is itself a valid `--config` file; the
//! meta keys are skipped when read back.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Keys describing the run rather than configuring it.
const META_KEYS: &[&str] = &["tool", "version", "subcommand", "out", "duration-ms"];

#[derive(Debug, Default, Clone)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        let mut m = Self::default();
        m.push("tool", "entpower");
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("subcommand", subcommand);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Full-precision float rendering so the manifest round-trips bitwise.
    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, format!("{value:.17e}"));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn path_for(out: &Path) -> PathBuf {
        out.with_extension("manifest")
    }
}

/// Read a key=value config file (for example a previous manifest). Unknown
/// non-meta keys trigger a warning on stderr but are not fatal.
pub fn read_config(path: &Path, known_keys: &[&str]) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if META_KEYS.contains(&key) {
            continue;
        }
        if !known_keys.contains(&key) {
            eprintln!("warning: ignoring unknown config key '{key}'");
            continue;
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}
