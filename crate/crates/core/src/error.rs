use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the valid range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("SSB placement error: {0}")]
    Placement(String),

    #[error("expected {expected} samples, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("insufficient samples: need {needed} from index {from}, stream holds {available}")]
    InsufficientSamples {
        needed: usize,
        from: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input stream")]
    EmptyInput,

    #[error("detected frame start lies {0} samples before the stream origin")]
    NegativeFrameStart(i64),

    #[error("no PSS detected on any of {0} GSCN candidates")]
    NotFound(usize),

    #[error("calibration failure: {0}")]
    Calibration(String),

    #[error("IQ file error: {0}")]
    IqFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable, machine-readable error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "out_of_range",
            Error::Placement(_) => "placement",
            Error::Length { .. } => "length",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::Config(_) => "config",
            Error::EmptyInput => "empty_input",
            Error::NegativeFrameStart(_) => "negative_frame_start",
            Error::NotFound(_) => "not_found",
            Error::Calibration(_) => "calibration",
            Error::IqFile(_) => "iq_file",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn range(what: &'static str, value: i64, min: i64, max: i64) -> Self {
        Error::OutOfRange {
            what,
            value,
            min,
            max,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
