use thiserror::Error;

/// Errors raised while building or solving a pile problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {value} ({reason})")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("layer thicknesses sum to {sum} m but pile length is {length} m")]
    ThicknessMismatch { sum: f64, length: f64 },

    #[error("profile has no layers")]
    EmptyProfile,

    #[error("x = {x} m lies outside the pile [0, {length}] m")]
    OutOfDomain { x: f64, length: f64 },

    #[error("psi*h = {value} exceeds the hyperbolic limit {limit} (layer {layer})")]
    HyperbolicOverflow {
        layer: usize,
        value: f64,
        limit: f64,
    },

    #[error("null point formula undefined: {0}")]
    NullPointDomain(String),

    #[error("degenerate case: {0}")]
    Degenerate(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("need at least {min} {what}, got {got}")]
    TooFew {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("calibration: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
