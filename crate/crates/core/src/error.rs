use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter lies outside the family's admissible set.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// A function argument lies outside the function's domain.
    #[error("argument out of domain: {0}")]
    Domain(String),

    /// Density-type evaluation at a point where the value is not finite.
    #[error("boundary evaluation: {0}")]
    Boundary(String),

    #[error("numeric routine did not converge: {0}")]
    Convergence(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// No optimizer start reached the convergence criterion.
    #[error("optimization failed: {message} (best objective {best_value} at {best_point:?})")]
    Optimization {
        message: String,
        best_point: Vec<f64>,
        best_value: f64,
    },

    #[error("covariance allocation undefined: {0}")]
    AllocationUndefined(String),

    #[error("data error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Data { row: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn data(row: Option<usize>, message: impl Into<String>) -> Self {
        Error::Data {
            row,
            message: message.into(),
        }
    }
}
