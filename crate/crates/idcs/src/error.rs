//! Crate-wide error type.
//!
//! Three failure families matter to callers: bad input (rejected before any
//! state changes), a trade operation attempted in the wrong lifecycle state
//! (also rejected cleanly), and a persisted artifact that fails integrity
//! checks on replay. I/O and serialization errors pass through wrapped.

use thiserror::Error;

/// Anything that can go wrong inside the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input rejected by validation; the message says which rule failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A trade operation was called in a state that does not allow it.
    /// The trade is left exactly as it was.
    #[error("trade {trade_id}: cannot {operation} while {state}")]
    InvalidState {
        trade_id: u64,
        operation: &'static str,
        state: &'static str,
    },

    /// An event log failed verification during replay: a sequence gap, a
    /// malformed record, or a recomputed settlement that disagrees with the
    /// logged one.
    #[error("corrupt event log: {0}")]
    CorruptLog(String),

    /// A dataset file could not be interpreted as an indicator table.
    #[error("dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Convenience constructor for [`Error::InvalidInput`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
