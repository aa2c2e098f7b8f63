use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// `joint` is 1-based, matching how joints are numbered in scene files and reports.
    #[error("joint {joint} angle {value} outside limits [{lo}, {hi}]")]
    JointLimit {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid robot model: {0}")]
    InvalidModel(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("unsupported primitive pair: {0}")]
    UnsupportedPair(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate scene: no {missing} samples after {draws} draws")]
    DegenerateScene { missing: &'static str, draws: usize },

    #[error("could not balance dataset within {draws} draws ({n_free} free, {n_collide} collided)")]
    Unbalanced {
        draws: usize,
        n_free: usize,
        n_collide: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite activation at layer {layer}")]
    NonFiniteLayer { layer: usize },

    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },

    #[error("non-finite field value during optimization at iteration {iteration}")]
    NonFiniteField { iteration: usize },

    #[error("frozen endpoint {index} has g = {g} above threshold {threshold}")]
    EndpointAboveThreshold { index: usize, g: f64, threshold: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("joint count mismatch: checkpoint has {checkpoint}, scene has {scene}")]
    JointCountMismatch { checkpoint: usize, scene: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::JointLimit { .. } => "joint_limit",
            Error::InvalidModel(_) => "invalid_model",
            Error::InvalidScene(_) => "invalid_scene",
            Error::UnsupportedPair(_) => "unsupported_pair",
            Error::Empty(_) => "empty_input",
            Error::DegenerateScene { .. } => "degenerate_scene",
            Error::Unbalanced { .. } => "unbalanced",
            Error::InvalidConfig(_) => "invalid_config",
            Error::NonFiniteLayer { .. } => "non_finite_layer",
            Error::NonFiniteLoss { .. } => "non_finite_loss",
            Error::NonFiniteField { .. } => "non_finite_field",
            Error::EndpointAboveThreshold { .. } => "endpoint_above_threshold",
            Error::Format(_) => "format",
            Error::JointCountMismatch { .. } => "joint_count_mismatch",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
