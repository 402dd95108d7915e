//! Accuracy requests and truncation reporting.
//!
//! Every truncated object (prime sum, Euler product, Kloosterman series,
//! quadrature) reports the cutoffs it used together with a tail estimate,
//! so downstream comparisons can carry an explicit error budget instead of
//! silently trusting defaults.

use serde::{Deserialize, Serialize};

/// Requested accuracy for an evaluation. At least one tolerance must be
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalAccuracy {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl EvalAccuracy {
    pub fn new(abs_tol: f64, rel_tol: f64) -> crate::Result<Self> {
        if !(abs_tol >= 0.0) || !(rel_tol >= 0.0) {
            return Err(crate::Error::domain("tolerances must be >= 0 and finite"));
        }
        if abs_tol == 0.0 && rel_tol == 0.0 {
            return Err(crate::Error::domain(
                "at least one of abs_tol, rel_tol must be positive",
            ));
        }
        Ok(EvalAccuracy { abs_tol, rel_tol })
    }

    pub fn abs(abs_tol: f64) -> Self {
        EvalAccuracy {
            abs_tol,
            rel_tol: 0.0,
        }
    }

    /// Absolute slack allowed at magnitude `scale`.
    pub fn at_scale(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale.abs()
    }
}

impl Default for EvalAccuracy {
    fn default() -> Self {
        EvalAccuracy {
            abs_tol: 1e-12,
            rel_tol: 0.0,
        }
    }
}

/// Whether a tail estimate is a proved bound or a measured extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailKind {
    /// Bounds the discarded remainder by an explicit inequality.
    Rigorous,
    /// Extrapolated from the observed decay of partial contributions.
    Heuristic,
}

/// A tail estimate attached to a truncated computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub bound: f64,
    pub kind: TailKind,
}

impl TailEstimate {
    pub fn rigorous(bound: f64) -> Self {
        TailEstimate {
            bound,
            kind: TailKind::Rigorous,
        }
    }

    pub fn heuristic(bound: f64) -> Self {
        TailEstimate {
            bound,
            kind: TailKind::Heuristic,
        }
    }

    pub fn zero() -> Self {
        TailEstimate::rigorous(0.0)
    }
}

/// Truncation limits actually used by a computation, with attached tail
/// estimates. Single-run outputs embed this next to every result row.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PrecisionBudget {
    /// Largest prime included in prime-indexed sums/products.
    pub prime_cutoff: Option<u64>,
    /// Largest Kloosterman modulus included in a Petersson series.
    pub c_cutoff: Option<u64>,
    /// Half-width of the quadrature window actually covered.
    pub quadrature_window: Option<f64>,
    /// Number of quadrature evaluations.
    pub quadrature_points: Option<u64>,
    /// Accumulated tail estimates, worst kind wins.
    pub tails: Vec<(String, TailEstimate)>,
}

impl PrecisionBudget {
    pub fn push_tail(&mut self, label: impl Into<String>, tail: TailEstimate) {
        self.tails.push((label.into(), tail));
    }

    /// Sum of all recorded tail bounds.
    pub fn total_tail(&self) -> f64 {
        self.tails.iter().map(|(_, t)| t.bound).sum()
    }

    /// True when every recorded tail is rigorous.
    pub fn all_rigorous(&self) -> bool {
        self.tails.iter().all(|(_, t)| t.kind == TailKind::Rigorous)
    }

    /// Merge another budget's records into this one.
    pub fn absorb(&mut self, other: &PrecisionBudget) {
        if let Some(p) = other.prime_cutoff {
            self.prime_cutoff = Some(self.prime_cutoff.map_or(p, |q| q.max(p)));
        }
        if let Some(c) = other.c_cutoff {
            self.c_cutoff = Some(self.c_cutoff.map_or(c, |q| q.max(c)));
        }
        if let Some(w) = other.quadrature_window {
            self.quadrature_window = Some(self.quadrature_window.map_or(w, |q| q.max(w)));
        }
        if let Some(n) = other.quadrature_points {
            self.quadrature_points = Some(self.quadrature_points.unwrap_or(0) + n);
        }
        self.tails.extend(other.tails.iter().cloned());
    }
}
