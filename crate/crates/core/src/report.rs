//! Check reports shared by every verifier.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub passed: bool,
    pub checked: usize,
    pub skipped: usize,
    pub window: String,
    pub counterexample: Option<String>,
    pub notes: Vec<String>,
    /// Wall time; excluded from deterministic dumps.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<u128>,
}

impl CheckReport {
    pub fn new(id: impl Into<String>, window: impl Into<String>) -> Self {
        CheckReport {
            id: id.into(),
            passed: true,
            checked: 0,
            skipped: 0,
            window: window.into(),
            counterexample: None,
            notes: Vec::new(),
            elapsed_ms: None,
        }
    }

    /// Records a failure; only the first counterexample is kept.
    pub fn fail(&mut self, what: impl Into<String>) {
        if self.passed {
            self.counterexample = Some(what.into());
        }
        self.passed = false;
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    /// Folds a sub-report into this one.
    pub fn absorb(&mut self, other: &CheckReport) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        if !other.passed {
            let c = other.counterexample.clone().unwrap_or_default();
            if other.id.is_empty() {
                self.fail(c);
            } else {
                self.fail(format!("{}: {c}", other.id));
            }
        }
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.elapsed_ms = Some(start.elapsed().as_millis());
        self
    }

    /// One deterministic line, timing excluded.
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {} checked={} skipped={} window={}",
            self.id, self.checked, self.skipped, self.window
        );
        if let Some(c) = &self.counterexample {
            s.push_str(&format!(" first_failure=[{c}]"));
        }
        s
    }
}
