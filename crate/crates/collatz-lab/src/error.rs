use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map specification: {0}")]
    InvalidMapSpec(String),
    #[error("accelerated map requires an odd input, got even")]
    AcceleratedOnEven,
    #[error("accelerated map hit zero (a*n + b = 0); ord2 undefined")]
    AcceleratedHitZero,
    #[error("ord2 is undefined for zero")]
    Ord2OfZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("statistic undefined: {0}")]
    Undefined(String),
    #[error("insufficient 2-adic precision: need {need} bits, have {have}")]
    Precision { need: usize, have: usize },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
