//! Layering of flags over a TOML config file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

const GLOBAL_KEYS: [&str; 4] = ["seed", "threads", "out", "format"];
const SECTIONS: [&str; 6] = ["fit", "simulate", "dependence", "influence", "premium", "summarize"];

/// Read a config file and reject keys that no subcommand understands.
pub fn load(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for key in table.keys() {
        if !GLOBAL_KEYS.contains(&key.as_str()) && !SECTIONS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key '{key}'")));
        }
    }
    Ok(table)
}

/// Overlay the options set on the command line onto the config values.
///
/// `section` selects a subcommand table; `None` reads the top-level keys.
pub fn layer<T: Serialize + DeserializeOwned>(
    flags: &T,
    file: Option<&toml::Table>,
    section: Option<&str>,
) -> Result<T, CliError> {
    let to_config = |e: serde_json::Error| CliError::Config(e.to_string());
    let mut merged: Map<String, Value> = match (file, section) {
        (Some(t), Some(s)) => match t.get(s) {
            Some(v) => match serde_json::to_value(v).map_err(to_config)? {
                Value::Object(m) => m,
                _ => return Err(CliError::Config(format!("[{s}] must be a table"))),
            },
            None => Map::new(),
        },
        (Some(t), None) => t
            .iter()
            .filter(|(k, _)| GLOBAL_KEYS.contains(&k.as_str()))
            .map(|(k, v)| Ok((k.clone(), serde_json::to_value(v)?)))
            .collect::<Result<_, serde_json::Error>>()
            .map_err(to_config)?,
        (None, _) => Map::new(),
    };
    let Value::Object(known) = serde_json::to_value(flags).map_err(to_config)? else {
        return Err(CliError::Config("arguments are not a table".into()));
    };
    if let Some(bad) = merged.keys().find(|k| !known.contains_key(*k)) {
        let place = section.map_or("top level".to_string(), |s| format!("[{s}]"));
        return Err(CliError::Config(format!("unknown key '{bad}' in {place}")));
    }
    for (k, v) in known {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(to_config)
}
