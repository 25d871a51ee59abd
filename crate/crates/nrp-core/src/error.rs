//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by graph ingestion, the numeric pipeline, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed edge-list input; carries the 1-based source line.
    #[error("edge list line {line}: {message}")]
    EdgeList { line: usize, message: String },

    /// Node id outside the declared node count.
    #[error("node id {id} out of range for n={n}{}", context_suffix(.line))]
    NodeIdOutOfRange {
        id: usize,
        n: usize,
        line: Option<usize>,
    },

    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A dense test-scale oracle was asked to exceed its documented cap.
    #[error("{what} exceeds the dense oracle cap ({details})")]
    OracleCapExceeded { what: String, details: String },

    /// Matrix input contained NaN or infinity.
    #[error("non-finite input in {0}")]
    NonFiniteInput(String),

    /// Random-edge or negative-pair sampling could not finish.
    #[error("sampling failed: {0}")]
    Sampling(String),

    /// Evaluation harness misuse (empty inputs, K out of range, ...).
    #[error("evaluation: {0}")]
    Eval(String),
}

fn context_suffix(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" (edge list line {l})"),
        None => String::new(),
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
