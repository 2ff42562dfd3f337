use alloc::string::String;

/// Errors raised by the core computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("level {level} is outside [0, {depth}]")]
    LevelOutOfRange { level: u32, depth: u32 },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("grid has 2^{log2_cells} finest cells, above the cap of {cap}")]
    TooManyCells { log2_cells: u64, cap: u64 },

    #[error("expected {expected} cell values, got {got}")]
    ValueCount { expected: usize, got: usize },

    #[error("cell {cell} holds {value}; values must be finite and nonnegative")]
    InvalidValue { cell: usize, value: f64 },

    #[error("cube (level {level}) does not belong to this grid")]
    ForeignCube { level: u32 },

    #[error("step functions live on different grids")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponent error: {0}")]
    Exponent(String),

    #[error("weight has zero mass on the root cube")]
    DegenerateWeight,

    #[error("weight vanishes on cell {cell}; zero cells need an explicit opt-in")]
    Positivity { cell: usize },

    #[error("operation not supported for {0}")]
    Unsupported(&'static str),

    #[error("instance has {cells} cells, brute force is limited to {limit}")]
    Guard { cells: usize, limit: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = core::result::Result<T, Error>;
