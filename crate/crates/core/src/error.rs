//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model, claim, network or training configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A one-period node whose spot lies outside the hull of its successors.
    #[error("arbitrage at node: spot {spot} outside successor range [{lo}, {hi}]")]
    Arbitrage { spot: f64, lo: f64, hi: f64 },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact enumeration refused because the tree is too large.
    #[error("enumeration refused: {0}")]
    EnumerationCap(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged at iteration {iteration}: loss = {loss}")]
    Training { iteration: usize, loss: f64 },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
