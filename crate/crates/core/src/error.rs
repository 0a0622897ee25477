use thiserror::Error;

/// Errors raised by the toolkit, tagged with the module that produced them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("exponent: {0}")]
    Exponent(String),
    #[error("discretization: {0}")]
    Discretization(String),
    #[error("energy: {0}")]
    Energy(String),
    #[error("minimizer: {0}")]
    Minimizer(String),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("diagnostics: {0}")]
    Diagnostics(String),
    #[error("config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short name of the module the error originates from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "geometry",
            Error::Exponent(_) => "exponent_field",
            Error::Discretization(_) => "discretization",
            Error::Energy(_) => "energy",
            Error::Minimizer(_) => "minimizer",
            Error::Sweep(_) => "limit_sweep",
            Error::Oracle(_) => "oracle_1d",
            Error::Diagnostics(_) => "diagnostics",
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => "cli_io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
