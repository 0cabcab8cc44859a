use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Variants split into two families that the command-line front end maps to
/// different exit codes: input validation (`Domain`, `Validation`) and
/// numerical guards (`GridPrecondition`, `Window`, `Measurement`, `Fit`).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or input value failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A frequency grid is too narrow or too coarse for the field it must carry.
    #[error("grid precondition violated: {0}")]
    GridPrecondition(String),

    /// An output window clips more energy than allowed.
    #[error("window clips {clipped_fraction:.3e} of the output energy (limit {limit:.1e})")]
    Window { clipped_fraction: f64, limit: f64 },

    /// A width or peak could not be extracted from a sampled spectrum.
    #[error("measurement error: {0}")]
    Measurement(String),

    /// Least-squares fitting failed.
    #[error("fit did not converge: {reason} (residual norm {residual_norm:.3e})")]
    Fit { reason: String, residual_norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of a numerical guard rather than of the inputs.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::GridPrecondition(_) | Error::Window { .. } | Error::Measurement(_) | Error::Fit { .. }
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Validation(_) => "validation",
            Error::GridPrecondition(_) => "grid_precondition",
            Error::Window { .. } => "window",
            Error::Measurement(_) => "measurement",
            Error::Fit { .. } => "fit",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
