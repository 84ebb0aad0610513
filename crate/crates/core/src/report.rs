//! Pass/fail reports produced by the property checkers and estimate monitors.

use serde::Serialize;

/// Outcome of one named check. `residual` is the worst violation observed
/// (0 means the property held with margin); `witness` carries the inputs
/// that produced it when that is useful for debugging.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, residual: f64) -> Self {
        Check {
            name: name.into(),
            passed,
            residual,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Vec<f64>) -> Self {
        self.witness = Some(witness);
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<Check>,
}

impl PropertyReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn worst_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.residual))
    }

    /// Fold another report of the same shape into this one, keeping the worst
    /// residual per check. Used to aggregate per-point reports over a sample.
    pub fn merge_worst(&mut self, other: &PropertyReport) {
        if self.checks.is_empty() {
            self.checks = other.checks.to_vec();
            return;
        }
        for (mine, theirs) in self.checks.iter_mut().zip(&other.checks) {
            if theirs.residual > mine.residual {
                mine.residual = theirs.residual;
                mine.witness = theirs.witness.clone();
            }
            mine.passed &= theirs.passed;
        }
    }
}
