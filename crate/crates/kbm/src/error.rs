use num_complex::Complex64;

/// Errors produced by the toolkit.
///
/// The variants map onto the CLI exit codes: `InvalidInput` is a malformed
/// parameter or file (exit 2), `Hypothesis` is a violated theorem hypothesis
/// (exit 3), and the remaining variants are numerical failures (exit 4).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("point {zeta} lies within {distance:.3e} of the truncated spectrum")]
    NearSpectrum { zeta: Complex64, distance: f64 },

    #[error(
        "spectral separation failed: {found} eigenvalues with Re <= 1/2 (expected {expected}); \
         the window may be too small or |x| may exceed the convergence radius"
    )]
    SeparationFailure { found: usize, expected: usize },

    #[error("numerical failure: {0}")]
    NonConvergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Hypothesis(_) => 3,
            _ => 4,
        }
    }

    /// Stable machine-readable tag for the error family.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Hypothesis(_) => "hypothesis-violation",
            Error::NearSpectrum { .. } => "near-spectrum",
            Error::SeparationFailure { .. } => "separation-failure",
            Error::NonConvergence(_) => "non-convergence",
            Error::Io(_) => "io-error",
            Error::Json(_) => "json-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
