//! Structured outcomes shared by every check.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// Fail dominates, then inconclusive, then pass.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            Verdict::Pass => Value::Bool(true),
            Verdict::Fail => Value::Bool(false),
            Verdict::Inconclusive => Value::String("inconclusive".into()),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Outcome of a check: verdict, numeric invariants and witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub verdict: Verdict,
    pub witness: Option<Value>,
    pub truncation_degree: Option<usize>,
    pub details: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, verdict: Verdict) -> Self {
        Self { check: check.into(), verdict, witness: None, truncation_degree: None, details: BTreeMap::new(), notes: Vec::new() }
    }

    pub fn pass(check: impl Into<String>) -> Self {
        Self::new(check, Verdict::Pass)
    }

    pub fn fail(check: impl Into<String>, witness: Value) -> Self {
        let mut r = Self::new(check, Verdict::Fail);
        r.witness = Some(witness);
        r
    }

    pub fn with_detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn with_truncation(mut self, d: usize) -> Self {
        self.truncation_degree = Some(d);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Downgrades the verdict, keeping the first witness seen.
    pub fn absorb(&mut self, verdict: Verdict, witness: Option<Value>) {
        self.verdict = self.verdict.and(verdict);
        if self.witness.is_none() && verdict != Verdict::Pass {
            self.witness = witness;
        }
    }

    pub fn is_pass(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "check": self.check,
            "verdict": self.verdict.to_json(),
            "witness": self.witness.clone().unwrap_or(Value::Null),
            "truncation_degree": self.truncation_degree,
        });
        if !self.details.is_empty() {
            v["details"] = Value::Object(self.details.clone().into_iter().collect());
        }
        if !self.notes.is_empty() {
            v["notes"] = json!(self.notes);
        }
        v
    }
}

impl Serialize for VerificationReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}
