use thiserror::Error;

use crate::numerics::SpectralInterval;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("power iteration did not converge after {iterations} iterations (best interval [{}, {}])", best.lo, best.hi)]
    Convergence {
        iterations: usize,
        best: SpectralInterval,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("resource limit exceeded at n = {n}: {message}")]
    Resource { n: usize, message: String },

    #[error("pattern search budget of {budget} candidates exhausted ({} patterns ranked so far)", partial.ranked.len())]
    SearchBudget {
        budget: usize,
        partial: Box<crate::patterns::PatternSearch>,
    },

    #[error("invalid leaf path: {0}")]
    Path(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
