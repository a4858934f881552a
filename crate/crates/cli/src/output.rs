//! Error reporting, atomic file output and run manifests.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use scrambled_nets::ErrorClass;
use serde::{Deserialize, Serialize};

use crate::args::Command;

/// Process exit status with a machine-readable description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub class: &'static str,
    pub message: String,
}

impl Failure {
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const RESOURCE: i32 = 4;
    pub const NUMERICAL: i32 = 5;

    pub fn io(message: impl Into<String>) -> Self {
        Failure { code: Self::IO, class: "io", message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: Self::USAGE, class: "usage", message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: Self::VALIDATION, class: "validation", message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Failure { code: Self::NUMERICAL, class: "numerical", message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "code": self.code, "class": self.class, "message": self.message } }).to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.class, self.message)
    }
}

impl From<scrambled_nets::Error> for Failure {
    fn from(e: scrambled_nets::Error) -> Self {
        let message = e.to_string();
        match e.class() {
            ErrorClass::Validation => Failure { code: Self::VALIDATION, class: "validation", message },
            ErrorClass::Resource => Failure { code: Self::RESOURCE, class: "resource", message },
            ErrorClass::Numerical => Failure { code: Self::NUMERICAL, class: "numerical", message },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| Failure::io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| Failure::io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(fail)
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output types serialize");
    bytes.push(b'\n');
    bytes
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| Failure::validation(format!("malformed {}: {e}", path.display())))
}

/// Provenance of one invocation, written to `<output>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub command: Command,
    pub tool_version: String,
    pub library_version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub started_unix_ms: u128,
    pub wall_time_s: f64,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
