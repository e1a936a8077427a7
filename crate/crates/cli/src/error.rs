//! Exit codes and the JSON error payload written to stderr.

use mabuchi_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXISTS: u8 = 0;
pub const NOT_EXISTS: u8 = 1;
pub const INCONCLUSIVE: u8 = 2;
pub const USAGE: u8 = 64;
pub const INPUT_INVALID: u8 = 65;
pub const NUMERIC_FAILURE: u8 = 70;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub code: u8,
    pub kind: String,
    pub message: String,
    pub details: Value,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: USAGE, kind: "Usage".into(), message: message.into(), details: Value::Null }
    }

    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        CliError { code: INPUT_INVALID, kind: kind.into(), message: message.into(), details: Value::Null }
    }

    pub fn io(path: &str, err: std::io::Error) -> Self {
        CliError {
            code: INPUT_INVALID,
            kind: "Io".into(),
            message: format!("{path}: {err}"),
            details: json!({ "path": path }),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { code: NUMERIC_FAILURE, kind: "NumericFailure".into(), message: message.into(), details: Value::Null }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self, "exit_code": self.code }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let (kind, code, details) = match &err {
            Error::NonCrystallographic { i, j } => ("NonCrystallographic", INPUT_INVALID, json!({ "i": i, "j": j })),
            Error::DependentRoots => ("DependentRoots", INPUT_INVALID, Value::Null),
            Error::NonPositiveGram => ("NonPositiveGram", INPUT_INVALID, Value::Null),
            Error::WeylOverflow { cap } => ("WeylOverflow", INPUT_INVALID, json!({ "cap": cap })),
            Error::DimensionMismatch { expected, found } => {
                ("DimensionMismatch", INPUT_INVALID, json!({ "expected": expected, "found": found }))
            }
            Error::Unbounded => ("Unbounded", INPUT_INVALID, Value::Null),
            Error::LowerDimensional { dim } => ("LowerDimensional", INPUT_INVALID, json!({ "dim": dim })),
            Error::NotWInvariant { element, vertex } => {
                ("NotWInvariant", INPUT_INVALID, json!({ "element": element, "vertex": vertex }))
            }
            Error::NotCentral { root } => ("NotCentral", INPUT_INVALID, json!({ "root": root })),
            Error::RayOutsideChamber { index } => ("RayOutsideChamber", INPUT_INVALID, json!({ "index": index })),
            Error::OriginOutside => ("OriginOutside", INPUT_INVALID, Value::Null),
            Error::FourRhoOutside => ("FourRhoOutside", INPUT_INVALID, Value::Null),
            Error::NonDecaying { delta } => ("NonDecaying", INPUT_INVALID, json!({ "delta": delta })),
            Error::MismatchedInstances => ("MismatchedInstances", INPUT_INVALID, Value::Null),
            Error::RankTooHigh { rank } => ("RankTooHigh", INPUT_INVALID, json!({ "rank": rank })),
            Error::InvalidInput(_) => ("InvalidInput", INPUT_INVALID, Value::Null),
            Error::DegenerateRegion => ("DegenerateRegion", NUMERIC_FAILURE, Value::Null),
            Error::SingularMomentMatrix => ("SingularMomentMatrix", NUMERIC_FAILURE, Value::Null),
            Error::TailTooLarge { bound } => ("TailTooLarge", NUMERIC_FAILURE, json!({ "bound": bound })),
            Error::EmptyFamily => ("EmptyFamily", NUMERIC_FAILURE, Value::Null),
        };
        CliError { code, kind: kind.into(), message: err.to_string(), details }
    }
}
