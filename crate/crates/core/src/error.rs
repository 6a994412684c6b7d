use thiserror::Error;

/// Errors raised by the evidence engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("probability {0} is outside the admissible range")]
    InvalidProbability(f64),

    #[error("invalid training set: {0}")]
    InvalidTrainingSet(String),

    #[error(
        "kernel matrix factorization failed for every hyperparameter start \
         (nugget escalated to {nugget:e}); offending design: {design:?}"
    )]
    Factorization { nugget: f64, design: Vec<Vec<f64>> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "every acquisition candidate scored zero (log score -inf); \
         inspect the surrogate hyperparameters and the candidate box"
    )]
    DegenerateAcquisition,

    #[error("all importance weights are zero (posterior means are -inf on the whole pool)")]
    DegenerateWeights,

    #[error("log-likelihood evaluation failed at x = {x:?}: {message}")]
    ModelEvaluation { x: Vec<f64>, message: String },

    #[error("stiffness matrix is not positive definite for k = {0:?}")]
    NonPhysical(Vec<f64>),
}

pub type Result<T> = std::result::Result<T, Error>;
