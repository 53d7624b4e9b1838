use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("requested order {requested} exceeds available order {available}")]
    OrderOverflow { requested: usize, available: usize },

    #[error("power series has a vanishing constant term")]
    VanishingConstantTerm,

    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(String),

    #[error("refinement needs {required} atoms but the cap is {cap}")]
    CapExceeded { required: u128, cap: usize },

    #[error("insufficient data: need {needed} values, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("insufficient order: window {window} needs order >= {needed}, have {available}")]
    InsufficientOrder {
        window: usize,
        needed: usize,
        available: usize,
    },

    #[error("series too short at radius {radius}: tail bound {bound:e} exceeds {tol:e}")]
    SeriesTooShort { radius: f64, bound: f64, tol: f64 },

    #[error("reciprocal residual {residual:e} exceeds limit {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
