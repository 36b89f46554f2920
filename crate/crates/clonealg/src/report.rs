//! Reports printed by every verb, and the error type mapped to exit codes.

use std::fmt;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use clonealg_core::algebra::AlgebraError;
use clonealg_core::birkhoff::BirkhoffError;
use clonealg_core::clone_algebra::CloneError;
use clonealg_core::hyperterm::{ParseError, TermError};
use clonealg_core::talgebra::TError;

use crate::formats::FormatError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    /// A configured bound was hit before an answer was reached.
    Resource(String),
    /// Two routes that must agree did not, or a self test failed.
    Disagreement(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 1,
            CliError::Resource(_) => 2,
            CliError::Disagreement(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Input(m) => write!(f, "input: {m}"),
            CliError::Resource(m) => write!(f, "resource bound: {m}"),
            CliError::Disagreement(m) => write!(f, "disagreement: {m}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TermError> for CliError {
    fn from(e: TermError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<BirkhoffError> for CliError {
    fn from(e: BirkhoffError) -> Self {
        if e.is_resource_limit() {
            CliError::Resource(e.to_string())
        } else if let BirkhoffError::Disagreement(_) = e {
            CliError::Disagreement(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<TError> for CliError {
    fn from(e: TError) -> Self {
        BirkhoffError::from(e).into()
    }
}

impl From<CloneError> for CliError {
    fn from(e: CloneError) -> Self {
        BirkhoffError::from(e).into()
    }
}

/// The outcome of one verb. Serialised with sorted keys, so identical
/// inputs give byte-identical output.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub verb: String,
    pub inputs_digest: String,
    pub answer: Value,
    pub exactness: Option<&'static str>,
    pub certificate: Value,
    pub witness: Value,
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(answer: impl Into<Value>) -> Report {
        Report {
            verb: String::new(),
            inputs_digest: String::new(),
            answer: answer.into(),
            exactness: None,
            certificate: Value::Null,
            witness: Value::Null,
            timing_ms: None,
        }
    }

    pub fn yes_no(holds: bool) -> Report {
        Report::new(if holds { "yes" } else { "no" })
    }

    pub fn exact(mut self) -> Report {
        self.exactness = Some("exact");
        self
    }

    pub fn exactness(mut self, tag: &'static str) -> Report {
        self.exactness = Some(tag);
        self
    }

    pub fn certificate(mut self, v: Value) -> Report {
        self.certificate = v;
        self
    }

    pub fn witness(mut self, v: Value) -> Report {
        self.witness = v;
        self
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("verb".into(), json!(self.verb));
        m.insert("inputs_digest".into(), json!(self.inputs_digest));
        m.insert("answer".into(), self.answer.clone());
        m.insert("exactness".into(), json!(self.exactness));
        m.insert("certificate".into(), self.certificate.clone());
        m.insert("witness".into(), self.witness.clone());
        if let Some(t) = self.timing_ms {
            m.insert("timing_ms".into(), json!(t));
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("values serialise")
    }

    /// The answer on the first line, then exactness and witness when present.
    pub fn to_text(&self) -> String {
        let mut out = match &self.answer {
            Value::String(s) => s.clone(),
            v => v.to_string(),
        };
        if let Some(e) = self.exactness {
            out.push_str(&format!("\nexactness: {e}"));
        }
        if !self.witness.is_null() {
            out.push_str(&format!("\nwitness: {}", self.witness));
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("\ntiming: {t:.1} ms"));
        }
        out
    }
}

/// SHA-256 over the verb, the answer-relevant arguments and the contents
/// of every input file, so copies of a file at other paths digest equally.
pub fn inputs_digest(verb: &str, args: &[String], files: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    h.update(verb.as_bytes());
    for a in args {
        h.update([0u8]);
        h.update(a.as_bytes());
    }
    for f in files {
        h.update([1u8]);
        h.update(Sha256::digest(f));
    }
    hex::encode(h.finalize())
}
