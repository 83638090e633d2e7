//! Layered configuration: per-command defaults, then the `[command]` table of
//! an optional TOML file, then command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn load_file(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    text.parse::<toml::Table>().map_err(|e| CliError::Input {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Overlays set flags on the file's `section` table and deserialises the
/// result; absent keys take the config type's defaults.
pub fn merge<A, C>(file: Option<&toml::Table>, section: &str, flags: &A) -> Result<C, CliError>
where
    A: Serialize,
    C: DeserializeOwned,
{
    let mut merged = match file.and_then(|f| f.get(section)) {
        None => toml::Table::new(),
        Some(toml::Value::Table(t)) => t.clone(),
        Some(_) => return Err(CliError::Config(format!("`{section}` must be a table"))),
    };
    let flags = toml::Table::try_from(flags).map_err(|e| CliError::Config(e.to_string()))?;
    merged.extend(flags);
    toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_owned()))
}

/// Short digest of the effective configuration.
pub fn config_hash<C: Serialize>(command: &str, config: &C) -> String {
    let body = serde_json::to_string(config).expect("config serialises");
    let digest = Sha256::new()
        .chain_update(command.as_bytes())
        .chain_update([0u8])
        .chain_update(body.as_bytes())
        .finalize();
    hex::encode(digest)[..16].to_owned()
}
