use thiserror::Error;

/// Errors raised while constructing or validating operator sets.
#[derive(Debug, Error)]
pub enum Error {
    /// A boundary closure needs at least 4p+2 nodes so the two corner blocks
    /// and at least two interior rows coexist.
    #[error("grid too small: {got} nodes, operator needs at least {required}")]
    GridTooSmall { required: usize, got: usize },

    #[error("spacing {index} is not positive: {value}")]
    NonPositiveSpacing { index: usize, value: f64 },

    /// The norm weights solved from the accuracy system must be positive for
    /// H to define an inner product; a sign failure means the requested
    /// (order, shifts) pair admits no operator on that grid.
    #[error("norm weight mu_{index} is not positive: {value}")]
    NonPositiveNorm { index: usize, value: f64 },

    #[error("accuracy system rank {got}, expected {expected}")]
    RankDeficient { expected: usize, got: usize },

    #[error("residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("no published data for order {order} with {shifts} shifted spacings")]
    UnknownScheme { order: usize, shifts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("cannot parse decimal value {0:?}")]
    ParseDecimal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
