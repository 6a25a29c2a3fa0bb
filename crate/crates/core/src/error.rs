use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must lie in 1..=16, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("invalid domain: {0}")]
    InvalidDomain(&'static str),

    #[error("invalid cone: {0}")]
    InvalidCone(&'static str),

    #[error("point lies outside the open domain")]
    Exterior,

    #[error("point is not on the domain boundary")]
    NotOnBoundary,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("walk reached the step cap of {0}")]
    StepCap(u64),

    #[error("{truncated} of {total} walks hit the step cap")]
    TooManyTruncated { truncated: u64, total: u64 },

    #[error("oracle evaluated outside its harmonicity region")]
    OutsideOracleRegion,

    #[error("no interior probe point found in {0} trials")]
    NoInteriorProbe(u32),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub(crate) fn param(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
