use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Nothing was checkable (for example a gate condition failed).
    Skipped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skipped => "SKIP",
        })
    }
}

/// Outcome of one claim on one input, with the numbers behind it.
///
/// `pass` is false exactly when some check failed; skipped checks do not
/// fail a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub inputs: String,
    pub computed: BTreeMap<String, f64>,
    pub outcome: Outcome,
    pub pass: bool,
    pub tolerance: f64,
    pub details: Vec<String>,
    #[serde(skip)]
    checks: usize,
}

impl VerificationReport {
    pub fn new(claim: impl Into<String>, inputs: impl Into<String>, tolerance: f64) -> Self {
        Self {
            claim: claim.into(),
            inputs: inputs.into(),
            computed: BTreeMap::new(),
            outcome: Outcome::Skipped,
            pass: true,
            tolerance,
            details: Vec::new(),
            checks: 0,
        }
    }

    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.computed.insert(name.into(), value);
    }

    pub fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.checks += 1;
        if ok {
            if self.outcome == Outcome::Skipped {
                self.outcome = Outcome::Pass;
            }
            self.details.push(format!("ok: {detail}"));
        } else {
            self.outcome = Outcome::Fail;
            self.pass = false;
            self.details.push(format!("FAILED: {detail}"));
        }
    }

    pub fn skip(&mut self, detail: impl Into<String>) {
        self.details.push(format!("skipped: {}", detail.into()));
    }

    pub fn note(&mut self, detail: impl Into<String>) {
        self.details.push(detail.into());
    }

    /// Number of checks evaluated (skips excluded).
    pub fn checks(&self) -> usize {
        self.checks
    }

    /// Lines of failed checks, if any.
    pub fn failures(&self) -> impl Iterator<Item = &str> {
        self.details
            .iter()
            .filter(|d| d.starts_with("FAILED"))
            .map(String::as_str)
    }
}
