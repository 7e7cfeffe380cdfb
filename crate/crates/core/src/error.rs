use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("level {level} outside supported range {min}..={max}")]
    LevelOutOfRange { level: u32, min: u32, max: u32 },

    #[error("field has {got} values (level {got_level}) but graph level {level} has {expected} vertices")]
    FieldMismatch {
        expected: usize,
        got: usize,
        level: u32,
        got_level: u32,
    },

    #[error("unknown cell word '{0}'")]
    UnknownWord(String),

    #[error("vertex {0} is not a boundary vertex")]
    NotBoundary(usize),

    #[error("invalid boundary data: {0}")]
    Boundary(String),

    #[error("unresolved winding on loop {word} between vertices {from} and {to} (circle distance {distance}); refine the level")]
    UnresolvedWinding {
        word: String,
        from: usize,
        to: usize,
        distance: f64,
    },

    #[error("non-integer winding {value} on loop {word}")]
    NonIntegerWinding { word: String, value: f64 },

    #[error("level {level} too coarse for a degree of order {order}; need level >= {needed}")]
    LevelTooCoarse { level: u32, order: u32, needed: u32 },

    #[error("no admissible cut vertex on loop {0}")]
    NoAdmissibleCut(String),

    #[error("jump constraint violated at cut {word}: mismatch {mismatch}")]
    ConstraintViolation { word: String, mismatch: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("not an equilibrium: residual {0:e} exceeds 1e-8")]
    NotEquilibrium(f64),

    #[error("invalid degree '{0}'")]
    ParseDegree(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LevelOutOfRange { .. } => "level-out-of-range",
            Error::FieldMismatch { .. } => "field-mismatch",
            Error::UnknownWord(_) => "unknown-word",
            Error::NotBoundary(_) => "not-boundary",
            Error::Boundary(_) => "bad-boundary",
            Error::UnresolvedWinding { .. } => "unresolved-winding",
            Error::NonIntegerWinding { .. } => "non-integer-winding",
            Error::LevelTooCoarse { .. } => "level-too-coarse",
            Error::NoAdmissibleCut(_) => "no-admissible-cut",
            Error::ConstraintViolation { .. } => "constraint-violation",
            Error::Singular(_) => "singular-system",
            Error::NoConvergence(_) => "no-convergence",
            Error::NotEquilibrium(_) => "not-equilibrium",
            Error::ParseDegree(_) => "bad-degree",
            Error::Unsupported(_) => "unsupported",
        }
    }
}
