use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not modular: {0}")]
    NotModular(String),
    #[error("axiom check failed: {0}")]
    Axiom(String),
    #[error("newton did not converge (final residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("found {found} of {expected} triples")]
    TripleCount { found: usize, expected: usize },
    #[error("verlinde coefficient N[{a},{b}][{c}] = {value:.6} is not a nonnegative integer")]
    NonIntegral { a: usize, b: usize, c: usize, value: f64 },
    #[error("condensation: {0}")]
    Condense(String),
    #[error("resolution failed: {0}")]
    Resolve(String),
    #[error("factorization: {0}")]
    Factor(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
