use thiserror::Error;

use crate::interval::DyadicInterval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("breakpoints must be finite and strictly increasing")]
    InvalidBreakpoints,

    #[error("{breakpoints} breakpoints need {expected} values, got {got}")]
    ValueCount {
        breakpoints: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("support [{lo}, {hi}) escapes root {root}")]
    SupportEscapesRoot {
        lo: f64,
        hi: f64,
        root: DyadicInterval,
    },

    #[error("minimum scale {min_scale} lies above the root scale {root_scale}")]
    ScaleWindow { min_scale: i32, root_scale: i32 },

    #[error("dilation factor must be positive, got {0}")]
    InvalidDilation(f64),

    #[error("exponent must be positive, got {0}")]
    InvalidExponent(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("signature {0} is excluded from boundedness estimates")]
    UnsupportedSignature(String),

    #[error("x = {0} is a breakpoint of the input; offset the evaluation point")]
    AtBreakpoint(f64),

    #[error("band {needed} exceeds the guard {guard}")]
    BandOverflow { needed: usize, guard: usize },

    #[error("degree budget {budget} is below the symbol band {band}")]
    BudgetTooSmall { budget: usize, band: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
