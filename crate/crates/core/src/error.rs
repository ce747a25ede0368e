use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("{p} exceeds the supported maximum prime {max}")]
    PrimeTooLarge { p: u64, max: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("p = {p} divides a coefficient of ({a}, {b}, {c})")]
    Divisibility { p: u64, a: u64, b: u64, c: u64 },

    #[error("class index {index} out of range for {len} classes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("certified error bound {bound:e} exceeds the cap {cap:e} at {bits} bits")]
    PrecisionTooLow { bound: f64, cap: f64, bits: u32 },

    #[error("rounding residual {residual} too large at {bits} bits")]
    RoundingResidual { residual: f64, bits: u32 },

    #[error("rounding residual {residual} still too large at the maximum precision")]
    PrecisionEscalationFailed { residual: f64 },

    #[error("p = {p} is too large for exhaustive counting (max {max})")]
    Scale { p: u64, max: u64 },

    #[error("methods disagree: {0}")]
    Mismatch(String),
}
