use thiserror::Error;

/// Errors raised by the lattice, enumeration, game and wall-crossing routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} exceptional classes")]
    DimensionMismatch { left: usize, right: usize },

    #[error("ball count {0} outside the supported range 1..=12")]
    InvalidBallCount(usize),

    #[error("operation requires n = 9 balls, got n = {0}")]
    RequiresNineBalls(usize),

    #[error("reflection requires a (-2)-class, got self-intersection {0}")]
    NotARoot(i64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("line coefficient must be positive, got {0}")]
    NonPositiveLineCoefficient(String),

    #[error("capacity {index} is not strictly positive: {value}")]
    NonPositiveCapacity { index: usize, value: String },

    #[error("enumeration bound must be non-negative, got {0}")]
    NegativeBound(i64),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("area of D9 is not positive ({0}); the wall set is not locally finite here")]
    OutsideFiniteRegime(String),

    #[error("capacities {point} lie on the wall {wall}")]
    OnWall { wall: String, point: String },

    #[error("{0} is not a positive root")]
    NotPositiveRoot(String),

    #[error("area on {class} is {area}, expected strictly positive")]
    NonPositiveArea { class: String, area: String },

    #[error("node {node} has value {value}; only positive nodes can be fired")]
    IllegalFire { node: usize, value: i64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid starting capacities: {0}")]
    InvalidStart(String),

    #[error("step {step}: capacities lie on the wall {wall}")]
    LandedOnWall { step: usize, wall: String },

    #[error("no comparable pair found: {0}")]
    NoComparablePair(String),

    #[error("normal vector is zero")]
    ZeroNormal,

    #[error("no positive node to fire")]
    GameStuck,
}

pub type Result<T> = std::result::Result<T, Error>;
