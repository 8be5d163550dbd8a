use serde::{Deserialize, Serialize};

/// Outcome of one inequality instance `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub name: String,
    /// Annulus index, when the inequality is per-annulus.
    pub j: Option<usize>,
    /// Sample time, when the inequality is per-frame.
    pub t: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / max(rhs, 1e-300)`.
    pub ratio: f64,
    pub constant_used: f64,
    /// Absolute quadrature allowance; zero for discretely exact bounds.
    pub tolerance: f64,
    pub pass: bool,
}

impl InequalityVerdict {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, constant_used: f64) -> Self {
        Self::with_tolerance(name, lhs, rhs, constant_used, 0.0)
    }

    pub fn with_tolerance(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        constant_used: f64,
        tolerance: f64,
    ) -> Self {
        let ratio = lhs / rhs.max(1e-300);
        Self {
            name: name.into(),
            j: None,
            t: None,
            lhs,
            rhs,
            ratio: if ratio.is_finite() { ratio } else { f64::MAX },
            constant_used,
            tolerance,
            pass: lhs <= rhs + tolerance,
        }
    }

    pub fn at_annulus(mut self, j: usize) -> Self {
        self.j = Some(j);
        self
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    /// `rhs - lhs`; negative means violated (before tolerance).
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_and_ratio() {
        let v = InequalityVerdict::new("x", 1.0, 2.0, 1.0);
        assert!(v.pass);
        assert_eq!(v.ratio, 0.5);
        assert!(!InequalityVerdict::new("x", 2.0, 1.0, 1.0).pass);
        let eq = InequalityVerdict::new("x", 0.0, 0.0, 1.0);
        assert!(eq.pass);
        assert_eq!(eq.ratio, 0.0);
        let tol = InequalityVerdict::with_tolerance("x", 1.0 + 1e-9, 1.0, 1.0, 1e-8);
        assert!(tol.pass);
        assert!(tol.slack() < 0.0);
    }
}
