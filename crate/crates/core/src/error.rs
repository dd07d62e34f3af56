use thiserror::Error;

use crate::domain::PoiId;

/// Errors raised anywhere in the planning pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("walk uses edge {from} -> {to}, which is not an edge of the instance")]
    MissingEdge { from: PoiId, to: PoiId },

    #[error("negative stay duration {duration} at POI {poi}")]
    NegativeDuration { poi: PoiId, duration: f64 },

    #[error("curve evaluated at negative time {0}")]
    NegativeTime(f64),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("epsilon {0} is outside the open interval (0, 1)")]
    EpsilonOutOfRange(f64),

    #[error("curve is not non-decreasing; monotonize it first")]
    NonMonotoneCurve,

    #[error("curve for POI {0} is not concave; use the grid allocator")]
    NonConcaveCurve(PoiId),

    #[error("no path from {from} to {to}")]
    Unreachable { from: PoiId, to: PoiId },

    #[error("vertex id {0} is outside the graph")]
    VertexOutOfRange(PoiId),

    #[error("option conflict: {0}")]
    OptionConflict(String),

    #[error("infeasible model structure: {0}")]
    InfeasibleStructure(String),

    #[error("assignment does not decode to a tour: {0}")]
    Decode(String),

    #[error("instance too large for exhaustive enumeration ({0} POIs, limit {1})")]
    TooLarge(usize, usize),

    #[error("reward requirement {required} exceeds the attainable reward {attainable}")]
    RequirementUnreachable { required: f64, attainable: f64 },

    #[error("no feasible plan exists")]
    Infeasible,

    #[error("time limit reached before any feasible plan was found")]
    TimeLimitNoIncumbent,

    #[error("numerical failure in the LP solver: {0}")]
    Numerical(String),

    #[error("duplicate name `{0}` in model")]
    NameCollision(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
