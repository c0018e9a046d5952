use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed field: {0}")]
    MalformedField(String),
    #[error("ill-posed contraction: {0}")]
    IllPosedContraction(String),
    #[error("not a folded volume form: {0}")]
    NotFolded(String),
    #[error("transversality failure: {0}")]
    Transversality(String),
    #[error("collar too wide: {0}")]
    CollarTooWide(String),
    #[error("degenerate path: {0}")]
    PathDegeneracy(String),
    #[error("evaluation at a singular point: {0}")]
    SingularPoint(String),
    #[error("incomparable forms: {0}")]
    Incomparable(String),
    #[error("cohomological obstruction, regional defects {defects:?}")]
    Obstruction { defects: Vec<f64> },
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    #[error("orientation failure: {0}")]
    Orientation(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("diffeomorphism check failed, reduce amplitude: {0}")]
    ReduceAmplitude(String),
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("profile wider than collar: {0}")]
    ProfileTooWide(String),
    #[error("monotone interpolant not found: {0}")]
    Monotonicity(String),
    #[error("wrong parity: {0}")]
    WrongParity(String),
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for the command line: 2 for a cohomological
    /// obstruction, 3 for numerical failures, 4 for unusable input.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Obstruction { .. } => 2,
            Error::InternalConsistency(_)
            | Error::Orientation(_)
            | Error::Integration(_)
            | Error::ReduceAmplitude(_)
            | Error::Monotonicity(_)
            | Error::IllPosedContraction(_)
            | Error::CertificateFailure(_) => 3,
            _ => 4,
        }
    }
}
