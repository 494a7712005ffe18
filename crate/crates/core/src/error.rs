use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not a prime in (2, 2^31)")]
    InvalidModulus(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("destination partially overlaps an operand")]
    PartialOverlap,
    #[error("output aliases an input of a multiplication")]
    AliasViolation,
    #[error("cannot split a {rows}x{cols} block into quadrants")]
    OddDimension { rows: usize, cols: usize },
    #[error("view does not fit inside its buffer")]
    OutOfBounds,
    #[error("matrices over different moduli")]
    ModulusMismatch,
    #[error("matrix format: {0}")]
    Format(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown slot `{name}`")]
    UnknownSlot { line: usize, name: String },
    #[error("line {line}: contract `{contract}` forbids writing {slot}")]
    ContractViolation { line: usize, slot: String, contract: String },
    #[error("unknown schedule `{0}`")]
    UnknownSchedule(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("shape unsupported: {0}")]
    ShapeUnsupported(String),
    #[error("contract breach: {0}")]
    ContractBreach(String),
    #[error("ill-formed schedule: {0}")]
    BadSchedule(String),
    #[error("scratch region too small for a {rows}x{cols} temporary")]
    ScratchExhausted { rows: usize, cols: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PebbleError {
    #[error("graph line {line}: {msg}")]
    MalformedGraph { line: usize, msg: String },
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("no cost model for `{0}`")]
    UnknownVariant(String),
    #[error("cost model needs {0}")]
    Unsupported(String),
}
