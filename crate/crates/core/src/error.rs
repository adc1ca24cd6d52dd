use std::fmt;

use thiserror::Error;

/// A syntax error in the expression DSL.
///
/// `position` is a byte offset into the source; it equals the source length
/// when the error is at end of input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: expected {expected}, found {found}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound coordinate `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(i32),
}

/// Label of a jet-matrix row: `First(a)` is `L_a`, `Second(a, b)` is the
/// anticommutator `{L_a, L_b}` with `a <= b`. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowLabel {
    First(usize),
    Second(usize, usize),
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::First(a) => write!(f, "L{}", a + 1),
            RowLabel::Second(a, b) => write!(f, "{{L{},L{}}}", a + 1, b + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("coordinate `{name}` is not declared in chart ({chart})")]
    UnknownCoordinate { name: String, chart: String },
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("point {point:?} lies outside the chart box")]
    OutsideBox { point: Vec<f64> },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("target dimension {actual} is below the critical dimension {critical}")]
    BelowCriticalDimension { critical: usize, actual: usize },
    #[error("non-finite entry in row {label}")]
    NonFinite { label: RowLabel },
    #[error("evaluation failed in block {block}: {source}")]
    Block {
        block: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("sampling: {0}")]
    Sampling(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
