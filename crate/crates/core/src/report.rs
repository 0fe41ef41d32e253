//! Small report types shared by the theorem checks.

use std::fmt;

use serde::Serialize;

use crate::scalar::Scalar;

/// Outcome of checking `lhs ≤ rhs` (or `lhs = rhs`) on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct InequalityReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

impl<S: Scalar> InequalityReport<S> {
    /// `lhs ≤ rhs`, exact for rationals and within the float tolerance for `f64`.
    pub fn le(lhs: S, rhs: S) -> Self {
        let holds = lhs.ae_le(&rhs);
        InequalityReport { lhs, rhs, holds }
    }

    pub fn eq(lhs: S, rhs: S) -> Self {
        let holds = lhs.ae_eq(&rhs);
        InequalityReport { lhs, rhs, holds }
    }

    /// Whether both sides agree, not just the inequality.
    pub fn is_tight(&self) -> bool {
        self.lhs.ae_eq(&self.rhs)
    }
}

impl<T: fmt::Display> fmt::Display for InequalityReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lhs={} rhs={} {}",
            self.lhs,
            self.rhs,
            if self.holds { "holds" } else { "VIOLATED" }
        )
    }
}

/// Checkpoints `1, 2, 4, …` up to and including `horizon` (and `horizon`
/// itself when it is not a power of two).
pub fn geometric_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 1;
    while n < horizon {
        out.push(n);
        n *= 2;
    }
    if horizon > 0 {
        out.push(horizon);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn exact_and_float_comparisons() {
        let r = InequalityReport::le(Rational::new(1, 2), Rational::new(1, 2));
        assert!(r.holds && r.is_tight());
        assert!(!InequalityReport::le(Rational::new(1, 2), Rational::new(1, 3)).holds);
        assert!(InequalityReport::le(0.5 + 1e-12, 0.5).holds);
        assert!(!InequalityReport::eq(0.5 + 1e-6, 0.5).holds);
    }

    #[test]
    fn checkpoints() {
        assert_eq!(geometric_checkpoints(0), Vec::<usize>::new());
        assert_eq!(geometric_checkpoints(1), vec![1]);
        assert_eq!(geometric_checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(geometric_checkpoints(10), vec![1, 2, 4, 8, 10]);
    }
}
