use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("singular matrix: |det| = {det:e} <= {threshold:e}")]
    SingularMatrix { det: f64, threshold: f64 },
    #[error("density is +inf at the requested point")]
    OutsideDomain,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("locking constraint has no admissible witness: {0}")]
    EmptyAdmissibleSet(String),
    #[error("invalid Young measure: {0}")]
    InvalidMeasure(String),
    #[error("test function is +inf on atom {index} with positive weight")]
    InfiniteAtomValue { index: usize },
    #[error("base matrix |A| = {norm} exceeds locking radius {rho}")]
    InfeasibleBase { norm: f64, rho: f64 },
    #[error("matrix lies outside the closed locking region (gauge {gauge})")]
    OutsideRegion { gauge: f64 },
    #[error("barycenter mismatch on cell {cell}: {error:e}")]
    BarycenterMismatch { cell: usize, error: f64 },
    #[error("support violation on cell {cell}: |F| = {norm} > {rho}")]
    SupportViolation { cell: usize, norm: f64, rho: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("line search failed: step underflow after {iterations} iterations")]
    LineSearchFailure { iterations: usize },
    #[error("initial energy is not finite")]
    NonFiniteEnergy,
    #[error("initial deformation violates the constraints: {0}")]
    InfeasibleStart(String),
    #[error("incompatible parameters: {0}")]
    IncompatibleParameters(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}
