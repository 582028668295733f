use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Violations kept verbatim in a report; the rest are only counted.
pub const MAX_LISTED_VIOLATIONS: usize = 100;

/// Tolerance for checks whose both sides come from closed forms or exact sums.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for checks involving quadrature or grid optimisation.
pub const NUMERIC_TOL: f64 = 1e-9;

/// One failing point of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub location: String,
    pub slack: f64,
}

/// Outcome of one inequality family over a grid or scenario.
///
/// `pass`, `violations.is_empty()` and `worst_margin >= -tolerance` always
/// agree. Margins are `bound − observed`, clamped to `±f64::MAX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub domain: String,
    pub worst_margin: f64,
    pub pass: bool,
    /// Monte Carlo reports are informative only and never count as failures.
    pub advisory: bool,
    pub tolerance: f64,
    pub points_checked: u64,
    pub violation_count: u64,
    pub violations: Vec<ViolationRecord>,
    /// Named quantities worth printing alongside the verdict (roots, moments).
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    /// True when this report should turn the overall verdict into a failure.
    pub fn is_authoritative_failure(&self) -> bool {
        !self.pass && !self.advisory
    }
}

fn clamp(x: f64) -> f64 {
    if x.is_nan() {
        -f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

/// Accumulates slacks into a [`CheckReport`].
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    report: CheckReport,
}

impl ReportBuilder {
    pub fn new(check_name: impl Into<String>, domain: impl Into<String>, tolerance: f64) -> Self {
        Self {
            report: CheckReport {
                check_name: check_name.into(),
                domain: domain.into(),
                worst_margin: f64::MAX,
                pass: true,
                advisory: false,
                tolerance,
                points_checked: 0,
                violation_count: 0,
                violations: Vec::new(),
                values: BTreeMap::new(),
                notes: Vec::new(),
            },
        }
    }

    pub fn advisory(mut self, advisory: bool) -> Self {
        self.report.advisory = advisory;
        self
    }

    /// Records one point; `location` is only rendered for violations.
    /// A NaN slack counts as the worst possible violation.
    pub fn record(&mut self, slack: f64, location: impl FnOnce() -> String) {
        let slack = clamp(slack);
        let r = &mut self.report;
        r.points_checked += 1;
        r.worst_margin = r.worst_margin.min(slack);
        if slack < -r.tolerance {
            r.violation_count += 1;
            if r.violations.len() < MAX_LISTED_VIOLATIONS {
                r.violations.push(ViolationRecord {
                    location: location(),
                    slack,
                });
            }
        }
    }

    /// `bound ≥ observed`.
    pub fn dominates(&mut self, bound: f64, observed: f64, location: impl FnOnce() -> String) {
        self.record(bound - observed, location);
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64) {
        self.report.values.insert(name.into(), clamp(value));
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.report.notes.push(note.into());
    }

    pub fn finish(mut self) -> CheckReport {
        let r = &mut self.report;
        if r.points_checked == 0 {
            r.worst_margin = 0.0;
            r.notes.push("no points in domain".into());
        }
        r.pass = r.violation_count == 0;
        self.report
    }
}
