use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("invalid timezone `{0}`")]
    InvalidZone(String),
    #[error("unknown holiday region `{0}`")]
    UnknownRegion(String),
    #[error("holiday calendar `{region}` covers {first}-{last}, frame needs {year}")]
    CalendarCoverage {
        region: String,
        first: i32,
        last: i32,
        year: i32,
    },
    #[error("lag must be at least one hour")]
    ZeroLag,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("feature selection is empty")]
    EmptySelection,
    #[error("descriptor `{name}` is invalid: {violations:?}")]
    InvalidDescriptor {
        name: String,
        violations: Vec<String>,
    },
    #[error("descriptor `{0}` has no adapter producing it")]
    NoAdapter(String),
    #[error("frame lacks channel `{0}`")]
    MissingChannel(String),
    #[error("no rows survive assembly: {0}")]
    EmptyMatrix(String),
    #[error("column mismatch: model expects {expected:?}, matrix has {found:?}")]
    ColumnMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("brute-force Shapley values are limited to {limit} features, got {got}")]
    TooManyFeatures { limit: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
}
