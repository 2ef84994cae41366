use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: n = {n} is outside the closed-form domain (n >= {min})")]
    OutOfDomain { what: &'static str, n: u64, min: u64 },

    /// Working precision was not enough to decide a certified inequality.
    #[error("precision exhausted in {stage}: {detail}")]
    Precision { stage: String, detail: String },

    #[error("reduction failed at X0 = {x0}: no convergent up to index {depth} works for cases {offending:?}")]
    ReductionFailed {
        x0: u64,
        depth: usize,
        offending: Vec<(u32, u32)>,
    },

    /// A certified check came out false: the mathematics disagrees with what the
    /// pipeline expected.
    #[error("certification failed in {stage}: {detail}")]
    Certification { stage: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn precision(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precision {
            stage: stage.into(),
            detail: detail.into(),
        }
    }

    pub fn certification(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Certification {
            stage: stage.into(),
            detail: detail.into(),
        }
    }

    /// Precision and configuration problems map to exit code 2, mathematical
    /// surprises to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision { .. } | Error::InvalidArgument(_) | Error::Io(_) => 2,
            Error::OutOfDomain { .. } => 2,
            Error::ReductionFailed { .. } | Error::Certification { .. } => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
