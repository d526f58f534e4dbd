use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expressions live over different phases")]
    PhaseMismatch,
    #[error("invalid precision: {0}")]
    Precision(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("operator `{0}` is declared linear but fails the linearity audit")]
    NotLinear(String),
    #[error("operator `{0}` must be declared linear")]
    LinearityRequired(String),
    #[error("plain DJM requires f2 = 0; merge the split source first")]
    SplitSource,
    #[error("term count must be at least 1")]
    NoTerms,
    #[error("index {index} out of range (have {len})")]
    Index { index: usize, len: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric reference unstable: {0}")]
    Unstable(String),
    #[error("reference calibration failed: {0}")]
    Calibration(String),
    #[error("empty grid")]
    EmptyGrid,
}
