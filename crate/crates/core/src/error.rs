use thiserror::Error;

/// Everything that can go wrong in the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable tables do not match")]
    VarTableMismatch,
    #[error("truncation degrees do not match ({0} vs {1})")]
    DegreeMismatch(u32, u32),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no image given for variable `{0}`")]
    MissingImage(String),
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("jet truncated at degree {have} cannot feed an operator of degree {need}")]
    DegreeTooLow { have: u32, need: u32 },
    #[error(
        "matrix exponential needs nilpotent jet entries; entry ({0}, {1}) has a constant term"
    )]
    NotNilpotent(usize, usize),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("chart mode {mode} cannot apply a {space} symbol")]
    ModeMismatch { mode: String, space: String },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
