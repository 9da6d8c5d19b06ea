//! Pass/fail reporting for verification checks.
//!
//! Every verification routine in this crate records its findings as [`Check`]
//! entries instead of panicking: a check carries the worst gap it observed,
//! the tolerance it was held to, and enough detail to locate the offending
//! index or atom. Callers decide what a failure means.

use std::fmt;

use crate::lattice::LatticeElement;
use crate::util::weighted_std;

/// How inequality checks absorb noise: exactly (fixed slack only) or
/// statistically (three standard errors of the element under test, for
/// monte-carlo backends).
#[derive(Debug, Clone, Copy)]
pub enum Tolerance {
    Exact,
    Statistical { trials: usize },
}

impl Tolerance {
    /// Slack for a check anchored at `elem`, on top of `base`.
    pub fn slack_for(&self, elem: &LatticeElement, base: f64) -> f64 {
        match self {
            Tolerance::Exact => base,
            Tolerance::Statistical { trials } => {
                let se =
                    weighted_std(elem.values(), elem.space().weights()) / (*trials as f64).sqrt();
                base + 3.0 * se
            }
        }
    }

    /// Slack for an estimate that first averages `sample` within `blocks`
    /// conditioning cells: the dominant error is the per-cell standard
    /// error, of order `std(sample)·√(blocks/trials)`.
    pub fn conditional_slack(&self, sample: &LatticeElement, blocks: usize, base: f64) -> f64 {
        self.family_conditional_slack(sample, blocks, 1, base)
    }

    /// Like [`Self::conditional_slack`] for the worst cell among `family`
    /// simultaneous checks: the envelope of a maximum grows like
    /// `√(2·ln family)` standard errors beyond the three granted to a
    /// single check.
    pub fn family_conditional_slack(
        &self,
        sample: &LatticeElement,
        blocks: usize,
        family: usize,
        base: f64,
    ) -> f64 {
        match self {
            Tolerance::Exact => base,
            Tolerance::Statistical { trials } => {
                let spread = weighted_std(sample.values(), sample.space().weights());
                base + family_multiplier(family) * spread * (blocks as f64 / *trials as f64).sqrt()
            }
        }
    }

    /// Familywise version of [`Self::slack_for`].
    pub fn family_slack_for(&self, sample: &LatticeElement, family: usize, base: f64) -> f64 {
        self.family_conditional_slack(sample, 1, family, base)
    }
}

fn family_multiplier(family: usize) -> f64 {
    if family <= 1 {
        3.0
    } else {
        3.0 + (2.0 * (family as f64).ln()).sqrt()
    }
}

/// Outcome of a single verified claim.
#[derive(Debug, Clone)]
pub struct Check {
    /// Stable identifier of the claim, e.g. `"tower-property"`.
    pub id: String,
    /// Worst violation observed: 0.0 means the claim held exactly.
    pub worst: f64,
    /// Tolerance the claim is held to.
    pub tol: f64,
    /// Location of the worst violation, when one exists.
    pub detail: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst.is_finite() && self.worst <= self.tol
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok  " } else { "FAIL" };
        write!(
            f,
            "[{status}] {:<40} worst={:>12.5e} tol={:>9.1e}",
            self.id, self.worst, self.tol
        )?;
        if let Some(detail) = &self.detail {
            write!(f, "  ({detail})")?;
        }
        Ok(())
    }
}

/// An ordered collection of checks produced by one verification pass.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a claim outcome.
    pub fn record(&mut self, id: impl Into<String>, worst: f64, tol: f64) {
        self.checks.push(Check {
            id: id.into(),
            worst,
            tol,
            detail: None,
        });
    }

    /// Record a claim outcome together with the offending location.
    pub fn record_with(
        &mut self,
        id: impl Into<String>,
        worst: f64,
        tol: f64,
        detail: impl Into<String>,
    ) {
        self.checks.push(Check {
            id: id.into(),
            worst,
            tol,
            detail: Some(detail.into()),
        });
    }

    /// Record with a location that only makes sense when something was
    /// observed: the detail is dropped for a clean zero.
    pub fn record_located(
        &mut self,
        id: impl Into<String>,
        worst: f64,
        tol: f64,
        detail: impl Into<String>,
    ) {
        if worst > 0.0 {
            self.record_with(id, worst, tol, detail);
        } else {
            self.record(id, worst, tol);
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// The check with the largest violation-to-tolerance excess, if any failed.
    pub fn worst_failure(&self) -> Option<&Check> {
        self.checks.iter().filter(|c| !c.passed()).max_by(|a, b| {
            let ea = a.worst - a.tol;
            let eb = b.worst - b.tol;
            ea.partial_cmp(&eb).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// Largest observed violation across all checks (0.0 for an empty report).
    pub fn max_violation(&self) -> f64 {
        self.checks.iter().fold(0.0, |acc, c| acc.max(c.worst))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_passes_within_tolerance() {
        let mut report = Report::new();
        report.record("identity", 5e-13, 1e-12);
        report.record_with("bound", 2e-3, 1e-10, "i=3, atom 7");
        assert!(!report.passed());
        assert_eq!(report.worst_failure().unwrap().id, "bound");
        assert_eq!(report.max_violation(), 2e-3);
    }

    #[test]
    fn nan_and_infinity_fail() {
        let mut report = Report::new();
        report.record("infeasible", f64::INFINITY, 1e-10);
        assert!(!report.passed());
        let mut report = Report::new();
        report.record("nan", f64::NAN, 1e-10);
        assert!(!report.passed());
    }
}
