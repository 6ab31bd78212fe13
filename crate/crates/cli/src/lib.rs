//! Scenario ingestion, command dispatch and report emission for `causal-ops`.

pub mod commands;
pub mod render;
pub mod scenario;

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use commands::{execute, Command, Options, Outcome, VerifyTarget};
pub use scenario::{resolve, Resolved, Scenario, SCHEMA};

pub const TOOLKIT: &str = concat!("causal-ops ", env!("CARGO_PKG_VERSION"));

/// Problems with the input; the process exits with status 2.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("{file}: {source}")]
    Io { file: String, source: std::io::Error },
    #[error("{file}:{line}:{column}: {path}: {message}")]
    Parse { file: String, line: usize, column: usize, path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

/// Parses scenario JSON, naming the offending field and its position on failure.
pub fn parse_scenario(file: &str, text: &str) -> Result<Scenario, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        InputError::Parse {
            file: file.to_string(),
            line: inner.line(),
            column: inner.column(),
            path,
            message: strip_position(&inner.to_string()),
        }
    })
}

/// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A scenario file together with its hash.
pub struct Loaded {
    pub resolved: Resolved,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded, InputError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { file: file.clone(), source })?;
    let scenario = parse_scenario(&file, &text)?;
    Ok(Loaded { resolved: resolve(scenario)?, sha256: sha256_hex(text.as_bytes()) })
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub toolkit: &'static str,
    pub command: String,
    pub scenario_sha256: Option<String>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub passed: bool,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(command: String, scenario_sha256: Option<String>, options: &Options, outcome: Outcome) -> Self {
        Self {
            schema: SCHEMA,
            toolkit: TOOLKIT,
            command,
            scenario_sha256,
            seed: options.seed,
            trials: options.trials,
            passed: outcome.passed,
            result: outcome.result,
        }
    }
}
