use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the library.
///
/// The variants are grouped so that drivers can map them onto process exit
/// codes: [`Error::is_config`], [`Error::is_format`] and [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("outcome `{label}` has zero probability")]
    InvalidOutcome { label: String },

    #[error("measurement operator `{label}` has zero norm on the reference state")]
    DegenerateOperator { label: String },

    #[error("division by zero in component {component}")]
    DivisionByZero { component: usize },

    #[error("singular {what} matrix (condition number {condition:.3e})")]
    Singular { what: &'static str, condition: f64 },

    #[error("at pixel (row {row}, col {col}, channel {channel}): {source}")]
    AtPixel {
        row: usize,
        col: usize,
        channel: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("control loop did not converge for {} pixel(s), first at index {}", .pixels.len(), .pixels.first().copied().unwrap_or_default())]
    NonConvergence { pixels: Vec<usize> },

    #[error("unsupported image format: {0}")]
    Format(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Invalid parameters supplied by the caller.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Domain(_) | Error::Io(_) => true,
            Error::AtPixel { source, .. } => source.is_config(),
            _ => false,
        }
    }

    /// Shape or file-format problems with the data itself.
    pub fn is_format(&self) -> bool {
        match self {
            Error::DimensionMismatch { .. } | Error::Format(_) | Error::Image(_) | Error::Csv(_) => {
                true
            }
            Error::AtPixel { source, .. } => source.is_format(),
            _ => false,
        }
    }

    /// Process exit code: 1 configuration, 2 data shape/format, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        if self.is_format() {
            2
        } else if self.is_numerical() {
            3
        } else {
            1
        }
    }

    /// Failures of the numerical machinery (singular systems, loops that stall, ...).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotHermitian { .. }
            | Error::NotUnitary { .. }
            | Error::InvalidOutcome { .. }
            | Error::DegenerateOperator { .. }
            | Error::DivisionByZero { .. }
            | Error::Singular { .. }
            | Error::NonConvergence { .. } => true,
            Error::AtPixel { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
