use thiserror::Error;

/// Location of a parse error inside a `.vopt` document (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("degenerate cone: {0}")]
    DegenerateCone(String),

    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },

    #[error("unknown identifier `{name}` at {position}")]
    UnknownIdentifier { name: String, position: Position },

    #[error("expression is not differentiable at the point: {0}")]
    NonSmooth(String),

    #[error("point lies outside the domain box: coordinate {index} = {value} not in [{lo}, {hi}]")]
    DomainViolation { index: usize, value: f64, lo: f64, hi: f64 },

    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),

    #[error("candidate point is infeasible")]
    InfeasibleCandidate,

    #[error("simplex iteration limit of {0} pivots exceeded")]
    IterationLimit(usize),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("direction {index} is outside the critical cone (violation {violation:e})")]
    DirectionOutsideCriticalCone { index: usize, violation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
