//! Named numerical checks judged against a tolerance.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `value ≤ tolerance`.
    AtMost,
    /// Passes when `value ≥ tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            bound: Bound::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            bound: Bound::AtLeast,
        }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.tolerance,
            Bound::AtLeast => self.value >= self.tolerance,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}
