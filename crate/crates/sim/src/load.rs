//! Scenario configs from JSON files or the built-in catalog.

use std::fs;
use std::path::Path;

use frontrun_core::harness::{catalog, ConfigError, ScenarioConfig};

use crate::Error;

/// A built-in scenario name, or else a path to a JSON config.
pub fn scenario(arg: &str) -> Result<ScenarioConfig, Error> {
    if let Some(c) = catalog::builtin(arg) {
        return Ok(c);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(ConfigError { path: String::new(), message: format!("`{arg}` is neither a built-in scenario nor a file") }.into());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = parse(&text)?;
    config.validate()?;
    Ok(config)
}

/// Parse a JSON config. Errors carry the path of the offending field.
pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError { path: if path == "." { String::new() } else { path }, message: e.into_inner().to_string() }
    })
}

pub fn to_json(config: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}
