//! Verification suites, JSON ingestion and the command implementations
//! behind the `torsionlab` binary.

pub mod commands;
pub mod schema;
pub mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use suites::{run_suite, SUITES};

/// One check: a computed residual against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The statement being checked.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl CheckRecord {
    /// Non-finite residuals are stored as `f64::MAX` and fail.
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let (residual, note) = if residual.is_finite() {
            (residual, None)
        } else {
            (f64::MAX, Some(format!("non-finite residual {residual}")))
        };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            note,
            wall_time_ms: None,
        }
    }

    /// A check whose computation failed before producing a residual.
    pub fn failed(name: impl Into<String>, anchor: impl Into<String>, tolerance: f64, error: impl ToString) -> Self {
        let mut r = Self::new(name, anchor, f64::MAX, tolerance);
        r.note = Some(error.to_string());
        r
    }

    fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.residual <= tolerance;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn new(suite: &str, records: Vec<CheckRecord>) -> Self {
        Self {
            suite: suite.to_string(),
            passed: records.iter().all(|r| r.pass),
            records,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyOptions {
    /// Replacement tolerance per suite name.
    pub overrides: BTreeMap<String, f64>,
    pub timing: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("unknown suite {0:?}; known suites: all, {known}", known = SUITES.join(", "))]
    UnknownSuite(String),
    #[error("tolerance override for {suite:?} must be positive and finite, got {value}")]
    BadOverride { suite: String, value: f64 },
}

/// Runs `f`, recording its wall time when `timing` is set.
pub(crate) fn timed(timing: bool, f: impl FnOnce() -> CheckRecord) -> CheckRecord {
    let start = Instant::now();
    let mut r = f();
    if timing {
        r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    r
}

/// Runs one suite or, for `"all"`, every suite in order.
pub fn verify(name: &str, opts: &VerifyOptions) -> Result<VerifyReport, HarnessError> {
    for (suite, &value) in &opts.overrides {
        if !SUITES.contains(&suite.as_str()) {
            return Err(HarnessError::UnknownSuite(suite.clone()));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(HarnessError::BadOverride {
                suite: suite.clone(),
                value,
            });
        }
    }
    let names: Vec<&str> = if name == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&name) {
        vec![name]
    } else {
        return Err(HarnessError::UnknownSuite(name.to_string()));
    };
    let suites: Vec<SuiteReport> = names
        .into_iter()
        .map(|n| {
            let mut report = run_suite(n, opts.timing).expect("known suite");
            if let Some(&tol) = opts.overrides.get(n) {
                report = SuiteReport::new(n, report.records.into_iter().map(|r| r.with_tolerance(tol)).collect());
            }
            report
        })
        .collect();
    Ok(VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_pass_rule() {
        assert!(CheckRecord::new("a", "x", 1e-7, 1e-6).pass);
        assert!(!CheckRecord::new("a", "x", 2e-6, 1e-6).pass);
        let r = CheckRecord::new("a", "x", f64::NAN, 1.0);
        assert!(r.residual.is_finite() && !r.pass);
        assert!(CheckRecord::new("a", "x", 0.0, 0.0).pass);
    }

    #[test]
    fn unknown_names_are_errors() {
        assert!(matches!(
            verify("nope", &VerifyOptions::default()),
            Err(HarnessError::UnknownSuite(_))
        ));
        let mut opts = VerifyOptions::default();
        opts.overrides.insert("nope".into(), 1.0);
        assert!(verify("triviality", &opts).is_err());
        opts.overrides.clear();
        opts.overrides.insert("triviality".into(), -1.0);
        assert!(matches!(
            verify("triviality", &opts),
            Err(HarnessError::BadOverride { .. })
        ));
    }

    #[test]
    fn override_replaces_tolerance() {
        let mut opts = VerifyOptions::default();
        opts.overrides.insert("specialfn".into(), 1e-3);
        let report = verify("specialfn", &opts).unwrap();
        assert!(report.passed);
        assert!(report.suites[0].records.iter().all(|r| r.tolerance == 1e-3));
    }
}
