use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no feasible (l, k) for m = {m}, w = {w}")]
    InfeasibleParams { m: usize, w: u32 },

    #[error("invalid codec parameters (m = {m}, w = {w}, l = {l}, k = {k}): {reason}")]
    InvalidParams {
        m: usize,
        w: u32,
        l: u32,
        k: u32,
        reason: &'static str,
    },

    #[error("value {value} at stream {stream}, position {position} exceeds bound +-{bound}")]
    OutOfRange {
        stream: usize,
        position: usize,
        value: i128,
        bound: i128,
    },

    #[error("operation not admitted: worst-case output {worst_case} exceeds +-{limit}")]
    NotAdmitted { worst_case: u128, limit: u128 },

    #[error("kernel shape mismatch: {0}")]
    KernelShape(String),

    #[error("permutation is not a bijection on 0..{0}")]
    NotBijective(usize),

    #[error("operation {0} is not supported on this path")]
    UnsupportedOp(&'static str),

    #[error("expected {expected} streams, got {got}")]
    StreamCount { expected: usize, got: usize },

    #[error("block shape mismatch: {0}")]
    Shape(String),

    #[error("failure index {index} out of range for {workers} workers")]
    FailIndex { index: usize, workers: usize },

    #[error("stream {stream} failed and the plain scheme cannot recover it")]
    Unrecoverable { stream: usize },

    #[error("checksum mismatch at position {position}")]
    ChecksumMismatch { position: usize },

    #[error("recovered outputs differ between failure of worker {a} and worker {b}")]
    SweepMismatch { a: String, b: String },

    #[error("malformed stream file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
