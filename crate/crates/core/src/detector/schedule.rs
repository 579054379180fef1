//! Iteration management: how the stop point `s` and the arity `b` evolve.

use std::fmt;

use serde::{Serialize, Serializer};

/// Iterations up to and including this one advance `s` by a tenth and `b`
/// by one; later iterations take whole steps.
pub const FINE_STEP_ITERATIONS: u32 = 10;

/// The stop point `s`, held as an exact count of tenths so that comparisons
/// at 1.1, 1.2, ... 2.0 are not perturbed by binary rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StopPoint(u64);

impl StopPoint {
    pub const fn from_tenths(tenths: u64) -> Self {
        Self(tenths)
    }

    /// Accepts non-negative values that are whole multiples of 0.1.
    pub fn from_value(s: f64) -> Option<Self> {
        let tenths = (s * 10.0).round();
        ((s * 10.0 - tenths).abs() < 1e-9 && tenths >= 0.0).then_some(Self(tenths as u64))
    }

    pub fn tenths(self) -> u64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 10.0
    }

    /// `aas <= s`, evaluated as `10 * aas <= tenths`.
    #[inline]
    pub fn admits(self, aas: f64) -> bool {
        aas * 10.0 <= self.0 as f64
    }
}

impl fmt::Display for StopPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for StopPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// Advances `(s, b)` after iteration `i` has completed.
///
/// With `accelerated`, late iterations grow `b` by `s' - 2` (whole part,
/// at least 1); otherwise `b` always grows by one.
pub fn schedule_step(i: u32, s: StopPoint, b: u32, accelerated: bool) -> (StopPoint, u32) {
    if i <= FINE_STEP_ITERATIONS {
        return (StopPoint(s.0 + 1), b + 1);
    }
    let next = StopPoint(s.0 + 10);
    let step = if accelerated {
        (next.0.saturating_sub(20) / 10).max(1)
    } else {
        1
    };
    (next, b.saturating_add(step.min(u64::from(u32::MAX)) as u32))
}
