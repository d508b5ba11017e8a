//! Errors surfaced to the user, each tied to an exit code.

use serde::Serialize;

use mfbwalk::walk_model::{ValidationReport, Violation};
use mfbwalk::Error;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
            violations: Vec::new(),
        }
    }

    pub fn validation(path: &str, message: impl Into<String>) -> Self {
        let mut report = ValidationReport::default();
        report.push(path, message);
        Self::invalid(report)
    }

    pub fn invalid(report: ValidationReport) -> Self {
        Self {
            code: EXIT_VALIDATION,
            kind: "validation",
            message: report.to_string(),
            violations: report.violations,
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VERIFICATION,
            kind: "verification",
            message: message.into(),
            violations: Vec::new(),
        }
    }

    fn unsupported(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_UNSUPPORTED,
            kind: "unsupported",
            message: message.into(),
            violations: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Invalid(report) => Self::invalid(report),
            Error::Precondition(_) | Error::WindowTooSmall { .. } => Self {
                code: EXIT_VALIDATION,
                kind: "precondition",
                message,
                violations: Vec::new(),
            },
            Error::DegenerateRoots { .. }
            | Error::UnsupportedCase(_)
            | Error::NotAbsorbing
            | Error::NonTerminating => Self::unsupported(message),
            Error::Inconsistent(_) => Self::verification(message),
        }
    }
}
