use std::fmt;

use memres_core::Error;
use serde_json::json;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ACCURACY: u8 = 3;
pub const EXIT_BLOWUP: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, kind: "config".into(), message: message.into() }
    }

    pub fn accuracy(message: impl Into<String>) -> Self {
        Self { code: EXIT_ACCURACY, kind: "accuracy".into(), message: message.into() }
    }

    pub fn blowup(message: impl Into<String>) -> Self {
        Self { code: EXIT_BLOWUP, kind: "blowup".into(), message: message.into() }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        Self { code: EXIT_CONFIG, kind: "io".into(), message: format!("{context}: {err}") }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind, "code": self.code, "message": self.message } }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Accuracy(_) | Error::Contour(_) | Error::Overflow(_) => EXIT_ACCURACY,
            _ => EXIT_CONFIG,
        };
        Self { code, kind: e.kind().into(), message: e.to_string() }
    }
}
