use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FolstabError {
    #[error("metric is degenerate at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    DegenerateMetric { point: Vec<f64>, min_eigenvalue: f64 },

    #[error("finite-difference scheme failed: {0}")]
    Scheme(String),

    #[error("non-finite sample at node {node}")]
    NonFiniteField { node: usize },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("discretization error: {0}")]
    Discretization(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),

    #[error("no instability certificate: {0}")]
    NoCertificate(String),

    #[error("catalog data error: {0}")]
    Data(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, FolstabError>;

impl From<std::io::Error> for FolstabError {
    fn from(e: std::io::Error) -> Self {
        FolstabError::Io(e.to_string())
    }
}
