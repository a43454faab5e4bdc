use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("round {index} has input pair ({x}, {y}) outside both the test and key sets")]
    Classification { index: usize, x: usize, y: usize },

    #[error("incomplete statistics: no test rounds observed for input pair(s) {missing:?}")]
    IncompleteStatistics { missing: Vec<(usize, usize)> },

    #[error("QBER undefined on empty sifted keys")]
    UndefinedQber,

    #[error("remaining-error ratio undefined with zero initial errors")]
    UndefinedRatio,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("malformed pass plan: {0}")]
    Plan(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("protocol abort: S = {s_value} does not exceed the threshold {threshold}")]
    Abort { s_value: f64, threshold: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
