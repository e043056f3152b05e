use thiserror::Error;

/// Errors raised by the transforms, generators and conservation checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("degenerate averaging window")]
    DegenerateWindow,

    #[error("kernel undefined on boundary (s = {0})")]
    KernelOnBoundary(f64),

    #[error("invalid scale grid: {0}")]
    InvalidScaleGrid(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("under-resolved grid: {0}")]
    UnderResolved(String),

    #[error("field singularity inside grid")]
    SingularityInGrid,

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("fields carry a static (DC) component: {0}")]
    NonzeroDc(String),

    #[error("invalid frequencies: {0}")]
    InvalidModes(String),

    #[error("box touches grid boundary: {0}")]
    BoxOnBoundary(String),

    #[error("scale grid too short: {0}")]
    InsufficientScaleRange(String),

    #[error("field is not single-mode: {0}")]
    NotSingleMode(String),

    #[error("ESTF-1 header parse failure: {0}")]
    EstfHeader(String),

    #[error("ESTF-1 payload error: {0}")]
    EstfPayload(String),

    #[error("round trip mismatch at byte offset {offset}")]
    RoundTripMismatch { offset: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
