//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Model order outside {1, 2} was requested where a specific order is required.
    #[error("unsupported model order {0} (expected 1 or 2)")]
    UnsupportedOrder(usize),

    /// Model parameters outside the stationarity (admissible) region.
    #[error("model is not in the admissible region: {0}")]
    Inadmissible(String),

    /// A parameter failed basic validation (negative variance, zero replications, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Statistic atom indices violating max(m, k) < i.
    #[error("invalid statistic atom S[{m},{k},{i}]: require max(m,k) < i")]
    InvalidAtom { m: u32, k: u32, i: u32 },

    /// A truncated infinite sum whose tail bound never fell below tolerance.
    #[error("series sum did not converge within {max_terms} terms (tail bound {bound:.3e}, tolerance {tol:.3e})")]
    Convergence {
        max_terms: usize,
        bound: f64,
        tol: f64,
    },

    /// Division by a (near-)zero value while evaluating an expression.
    #[error("singular expansion point: denominator {value:.3e} has magnitude below 1e-12")]
    SingularExpansionPoint { value: f64 },

    /// Input data unusable for fitting (zero energy, singular normal equations, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Expression text that does not conform to the grammar.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
