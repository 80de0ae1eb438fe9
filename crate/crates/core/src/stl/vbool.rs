//! Verdict/magnitude pairs and the Max-semantics connectives over them.

use std::fmt;
use std::ops::Not;

/// A boolean verdict paired with a non-negative robustness magnitude.
///
/// The magnitude measures how convincingly the verdict holds. Signed
/// robustness is `+magnitude` for a true verdict and `-magnitude` for a false
/// one, so a zero magnitude still carries its verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VBool {
    pub verdict: bool,
    pub magnitude: f64,
}

impl VBool {
    pub const fn new(verdict: bool, magnitude: f64) -> Self {
        Self { verdict, magnitude }
    }

    pub const fn truth(magnitude: f64) -> Self {
        Self::new(true, magnitude)
    }

    pub const fn falsity(magnitude: f64) -> Self {
        Self::new(false, magnitude)
    }

    /// Verdict from the strict sign of `value` (`value > 0`), magnitude `|value|`.
    pub fn from_margin(value: f64) -> Self {
        Self::new(value > 0.0, value.abs())
    }

    pub fn signed(self) -> f64 {
        if self.verdict {
            self.magnitude
        } else {
            -self.magnitude
        }
    }

    pub fn and(self, other: VBool) -> VBool {
        match (self.verdict, other.verdict) {
            (true, true) => VBool::truth(self.magnitude.min(other.magnitude)),
            (true, false) => other,
            (false, true) => self,
            (false, false) => VBool::falsity(self.magnitude.max(other.magnitude)),
        }
    }

    pub fn or(self, other: VBool) -> VBool {
        !((!self).and(!other))
    }
}

impl Not for VBool {
    type Output = VBool;

    fn not(self) -> VBool {
        VBool::new(!self.verdict, self.magnitude)
    }
}

impl fmt::Display for VBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = if self.verdict { "T" } else { "F" };
        write!(f, "({v}, {})", self.magnitude)
    }
}

/// Conjunction over a window; `None` for an empty window.
pub fn conjunction<I: IntoIterator<Item = VBool>>(values: I) -> Option<VBool> {
    values.into_iter().reduce(VBool::and)
}
