use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("domain error in `{primitive}`: input {input} is outside its domain")]
    Domain { primitive: &'static str, input: f64 },

    #[error("domain error in `{primitive}` at index {index:?}: input {input} is outside its domain")]
    TensorDomain { primitive: &'static str, index: Vec<usize>, input: f64 },

    #[error("division by a value with zero primal")]
    DivisionByZero,

    #[error("unordered comparison (NaN primal)")]
    Unordered,

    #[error("index {index} out of bounds for dimension {dim}")]
    IndexOutOfBounds { index: usize, dim: usize },

    #[error("dimension {dim} exceeds the dense Hessian cap of {cap}; use a subspace method (FoMoH-KD) instead")]
    SizeCap { dim: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid axis {axis} for tensor of rank {rank}")]
    InvalidAxis { axis: usize, rank: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("loss output is not a scalar (shape {0:?})")]
    NonScalarOutput(Vec<usize>),

    #[error("linear system still singular after {retries} jitter retries")]
    Singular { retries: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed IDX file: {0}")]
    Idx(String),

    #[error("experiment aborted: {0}")]
    Aborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
