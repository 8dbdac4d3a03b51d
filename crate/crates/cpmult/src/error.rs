//! Crate-wide error type.

use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// Verdict-style failures (`NotPsd`, `NotCompletelyPositive`, …) carry a
/// numerical witness so callers can re-check the claim independently.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPsd {
        min_eigenvalue: f64,
        witness: Vec<Complex64>,
    },

    #[error("eigenvalue {value} lies outside the function domain ({lo}, {hi})")]
    DomainViolation { value: f64, lo: f64, hi: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:.6e})")]
    NotCompletelyPositive {
        min_eigenvalue: f64,
        witness: Vec<Complex64>,
    },

    #[error("map is not bimodular over the given algebra (defect {defect:.3e})")]
    NotBimodular { defect: f64 },

    #[error("input family is not minimal (relation norm {relation_norm:.3e})")]
    NotMinimalInput {
        relation: Vec<Complex64>,
        relation_norm: f64,
    },

    #[error("projection is not in the algebra (defect {defect:.3e})")]
    ProjectionNotInAlgebra { defect: f64 },

    #[error("filtration inconsistent at level {level}: {reason}")]
    InconsistentFiltration { level: usize, reason: String },

    #[error("restriction data inconsistent with the full object (residual {residual:.3e})")]
    InconsistentRestriction { residual: f64 },

    #[error("nodes {i} and {j} collide (separation below 1e-12)")]
    NodesCollide { i: usize, j: usize },

    #[error("node {value} is not strictly positive")]
    NonPositiveNode { value: f64 },

    #[error("derivative inconsistent with evaluator at x={x} (difference {diff:.3e})")]
    DerivativeMismatch { x: f64, diff: f64 },

    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("group table is not a group: {0}")]
    InvalidGroup(String),

    #[error("basis does not span a unital *-algebra: {0}")]
    InvalidAlgebra(String),

    #[error("matrix is not a multiplier over the given pair (span defect {defect:.3e})")]
    NotMultiplier { defect: f64 },

    #[error("operator {index} violates algebra membership (defect {defect:.3e})")]
    MembershipViolation { index: usize, defect: f64 },

    #[error("projections {i} and {j} do not commute (commutator norm {norm:.3e})")]
    NotCommuting { i: usize, j: usize, norm: f64 },

    #[error("atom system inconsistent: {0}")]
    InconsistentAtoms(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the filtration/covering level it occurred at.
    pub fn at_level(self, level: usize) -> Error {
        Error::AtLevel {
            level,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
