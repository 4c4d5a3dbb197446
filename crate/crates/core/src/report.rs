//! Machine-readable verification reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One named check inside a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub pass: bool,
    pub witnesses: BTreeMap<String, Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Check {
        Check {
            name: name.into(),
            params: BTreeMap::new(),
            pass,
            witnesses: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Check {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain data"),
        );
        self
    }

    pub fn witness(mut self, key: &str, value: impl Serialize) -> Check {
        self.witnesses.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain data"),
        );
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Result of running a suite. With `duration_ms` left unset the JSON form is
/// a pure function of `(suite, n_max, seed)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub n_max: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub duration_ms: Option<u64>,
}

impl VerificationReport {
    /// Sorts checks by name and derives the overall status.
    pub fn new(
        suite: impl Into<String>,
        n_max: usize,
        seed: u64,
        mut checks: Vec<Check>,
    ) -> VerificationReport {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let status = if checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        VerificationReport {
            suite: suite.into(),
            n_max,
            seed,
            checks,
            status,
            duration_ms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// One line per check plus a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
        }
        let failed = self.failures().count();
        let _ = writeln!(
            out,
            "{}: {} checks, {} failed (n_max = {}, seed = {}){}",
            self.suite,
            self.checks.len(),
            failed,
            self.n_max,
            self.seed,
            self.duration_ms
                .map(|d| format!(", {d} ms"))
                .unwrap_or_default()
        );
        out
    }
}
