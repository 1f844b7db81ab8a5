use serde::{Deserialize, Serialize};

/// One named numerical check: `pass` iff `residual < tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckReport {
            check: check.into(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual < tolerance,
        }
    }

    /// A check with an exact (boolean) outcome; residual is 0 or 1.
    pub fn exact(check: impl Into<String>, ok: bool) -> Self {
        CheckReport {
            check: check.into(),
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass: ok,
        }
    }
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
