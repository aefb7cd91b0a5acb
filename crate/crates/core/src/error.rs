use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("packet escapes grid: boundary density ratio {tail:e} exceeds {limit:e}")]
    PacketEscapesGrid { tail: f64, limit: f64 },
    #[error("nonpositive width: Re(gamma) = {0}")]
    NonpositiveWidth(f64),
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),
    #[error("numerical instability: {0}")]
    Instability(String),
    #[error("time {t} outside sequence span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
    #[error("gradient validation failed: {0}")]
    GradientValidation(String),
    #[error("singular parameter geometry: condition number {0:e}")]
    SingularGeometry(f64),
    #[error("neighbor collapse: displacement norm {0:e}")]
    NeighborCollapse(f64),
    #[error("ambiguous zero of the deviation determinant at sample {0}")]
    AmbiguousZero(usize),
    #[error("invalid Weierstrass plan: {0}")]
    InvalidPlan(String),
    #[error("leaf budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
