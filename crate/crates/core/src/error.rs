use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Parameter point outside the open domain of its chart.
    #[error("parameter point outside chart domain: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}): {context}")]
    NotPositiveDefinite {
        context: String,
        min_eigenvalue: f64,
    },

    /// An outcome with vanishing probability but non-vanishing probability derivative.
    #[error("outcome {outcome} has probability {probability:e} but derivative {derivative:e}; Fisher information diverges")]
    SingularOutcome {
        outcome: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("symmetric logarithmic derivative ill-posed: derivative entry {entry:e} on the kernel of the state")]
    IllPosedSld { entry: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("model is not identifiable: Fisher information is singular (smallest eigenvalue {min_eigenvalue:e})")]
    NonIdentifiable { min_eigenvalue: f64 },

    #[error("QCRB achievability condition violated: max |Im<l_i|l_j>| = {gap:e}")]
    NotAchievable { gap: f64 },

    #[error("maximizer did not converge after {iterations} iterations (best log-likelihood {best_value})")]
    NoConvergence {
        iterations: usize,
        best: Vec<f64>,
        best_value: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
