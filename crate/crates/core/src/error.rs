use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A field failed validation.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    /// Moments of a regularly varying law with k ≤ m do not exist.
    #[error("moments undefined for four-wave-mixing output (tail exponent k = {tail_exponent})")]
    MomentsUndefined { tail_exponent: f64 },

    /// Convolution grid does not resolve the noise kernel or the support.
    #[error("grid resolution: need lo <= {need_lo}, hi >= {need_hi}, spacing <= {max_spacing}; got lo = {lo}, hi = {hi}, spacing = {spacing}")]
    Resolution {
        need_lo: f64,
        need_hi: f64,
        max_spacing: f64,
        lo: f64,
        hi: f64,
        spacing: f64,
    },

    #[error("numeric range: {0}")]
    Range(String),

    /// Transform applied out of pipeline order.
    #[error("pipeline order: {0}")]
    Ordering(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("data format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable kind, used for JSON error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid { .. } => "invalid",
            Error::Unsupported(_) => "unsupported",
            Error::MomentsUndefined { .. } => "moments-undefined",
            Error::Resolution { .. } => "resolution",
            Error::Range(_) => "range",
            Error::Ordering(_) => "ordering",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
