use thiserror::Error;

/// Errors raised anywhere in the plate toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("triangle {triangle} references vertex {vertex}, but only {count} vertices exist")]
    VertexOutOfRange {
        triangle: usize,
        vertex: usize,
        count: usize,
    },
    #[error("non-conforming triangulation: {0}")]
    NonConforming(String),
    #[error("degenerate triangle {triangle}: signed area {area:e} is not positive")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("vertex {0} is not used by any triangle")]
    IsolatedVertex(usize),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no quadrature rule of degree {0}")]
    UnsupportedDegree(usize),
    #[error("derivative order {0} is not supported (maximum is 2)")]
    UnsupportedOrder(u8),
    #[error("point ({x}, {y}) lies outside the element")]
    PointOutside { x: f64, y: f64 },
    #[error("penalty parameter must be positive, got {0}")]
    InvalidPenalty(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("solver stopped after {iterations} iterations with residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Dörfler parameter must lie in (0, 1), got {0}")]
    InvalidTheta(f64),
    #[error("estimator input {name} is negative ({value:e})")]
    NegativeEstimator { name: &'static str, value: f64 },
    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
    #[error("the singular benchmark cannot be evaluated at the re-entrant corner")]
    SingularPoint,
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
