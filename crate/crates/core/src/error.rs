use thiserror::Error;

use crate::kernel::EntityId;

/// Errors raised by the engine. Each variant maps to one stable wire code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },
    #[error("grid dimensions must be at least 1x1 (got {width}x{height})")]
    BadDimensions { width: i64, height: i64 },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("entity kind `{kind}` has no attribute `{attr}`")]
    UnknownAttribute { kind: String, attr: String },
    #[error("attribute `{attr}` expects {expected}, got {got}")]
    TypeMismatch {
        attr: String,
        expected: &'static str,
        got: &'static str,
    },
    #[error("attribute `{attr}` value {value} outside [{min}, {max}]")]
    OutOfRange {
        attr: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("cell ({row}, {col}) is outside the {width}x{height} grid")]
    OutOfBounds {
        row: i64,
        col: i64,
        width: u32,
        height: u32,
    },
    #[error("no channel from agent {from} to agent {to}")]
    NoSuchChannel { from: u64, to: u64 },
    #[error("agent {0} is not alive")]
    NotAlive(u64),
    #[error("unknown point of view `{0}`")]
    UnknownPov(String),
    #[error("point of view `{pov}` has no mapping for entity kind `{kind}`")]
    PovKind { pov: String, kind: String },
    #[error("tick {tick} is not recorded (timeline holds 0..={max})")]
    BadTick { tick: u64, max: u64 },
    #[error("timeline expects tick {expected}, got {got}")]
    NonContiguous { expected: u64, got: u64 },
    #[error("dimension mismatch: layer is {layer_cols}x{layer_rows}, grid is {grid_cols}x{grid_rows}")]
    DimensionMismatch {
        layer_cols: usize,
        layer_rows: usize,
        grid_cols: usize,
        grid_rows: usize,
    },
    #[error("snapshot decode failed: {0}")]
    Decode(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
