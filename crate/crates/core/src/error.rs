use thiserror::Error;

/// Errors shared across the crate.
///
/// The CLI maps these onto exit codes: input problems (`Validation`,
/// `Unsorted`, `Parse`, `Io`) exit 2, statistical degeneracies
/// (`InsufficientData`, `DegenerateSeries`, `EmptyPanel`) exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("unsorted input for {instrument}/{contract}: {prev} followed by {next}")]
    Unsorted {
        instrument: String,
        contract: String,
        prev: String,
        next: String,
    },

    #[error("{file}: line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    #[error("insufficient data for {context}: needed {needed}, got {got}")]
    InsufficientData {
        context: String,
        needed: usize,
        got: usize,
    },

    #[error("degenerate series: {instrument} has zero second moment over the window")]
    DegenerateSeries { instrument: String },

    #[error("empty panel: no timestamp carries a valid return for every instrument")]
    EmptyPanel,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
