use std::path::Path;

use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Defaults, optionally overridden by a JSON config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    pub seed: u64,
    pub gamma: f64,
    pub dt: f64,
    pub horizon: f64,
    pub paths: usize,
    pub chain_steps: usize,
    pub workers: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: DEFAULT_SEED,
            gamma: 0.5,
            dt: 1e-3,
            horizon: 500.0,
            paths: 200,
            chain_steps: 100_000,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}
