use num_bigint::BigUint;
use thiserror::Error;

use crate::dynamics::AttractorId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure of one of the exact-integer checks behind a descent bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateCheck {
    BaseCase,
    InductionStep,
    Dominance,
}

impl std::fmt::Display for CertificateCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CertificateCheck::BaseCase => "base-case",
            CertificateCheck::InductionStep => "induction-step",
            CertificateCheck::Dominance => "dominance",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent {0}: must be at least 1")]
    InvalidExponent(u32),

    #[error("digit {digit} at position {position} exceeds bound {position}")]
    DigitOutOfRange { position: usize, digit: u32 },

    #[error("top digit is zero")]
    LeadingZero,

    #[error("malformed factoradic text {text:?}: {reason}")]
    Parse { text: String, reason: &'static str },

    #[error("orbit of {start} not closed after {cap} steps")]
    IterationCap { start: BigUint, cap: u64 },

    #[error("descent certificate failed for e={e}: {check} check")]
    CertificateFailed { e: u32, check: CertificateCheck },

    #[error("atlas for e={e} would hold {size} entries, limit is {limit}")]
    AtlasTooLarge { e: u32, size: BigUint, limit: u64 },

    #[error("atlas was built for e={atlas} but e={requested} was requested")]
    ExponentMismatch { atlas: u32, requested: u32 },

    #[error("{p} is not a fixed point for e={e}")]
    NotAFixedPoint { e: u32, p: BigUint },

    #[error("value {0} is zero or too large for this operation")]
    OutOfDomain(BigUint),

    #[error("shift {t} is shorter than the {needed} digits of the addend")]
    ShiftTooShort { t: usize, needed: usize },

    #[error("offset {l} fails for u={u}: reaches {attractor} after {steps} steps")]
    NiceFailed {
        l: BigUint,
        u: BigUint,
        attractor: AttractorId,
        steps: u64,
    },

    #[error("expansion needs {estimate} digits, cap is {cap}")]
    SizeCapExceeded { estimate: String, cap: usize },

    #[error("symbolic replay failed for i={i}: {reason}")]
    ReplayFailed { i: u64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable short tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidExponent(_) => "invalid-exponent",
            Error::DigitOutOfRange { .. } => "digit-out-of-range",
            Error::LeadingZero => "leading-zero",
            Error::Parse { .. } => "parse",
            Error::IterationCap { .. } => "iteration-cap",
            Error::CertificateFailed { .. } => "certificate-failed",
            Error::AtlasTooLarge { .. } => "atlas-too-large",
            Error::ExponentMismatch { .. } => "exponent-mismatch",
            Error::NotAFixedPoint { .. } => "not-a-fixed-point",
            Error::OutOfDomain(_) => "out-of-domain",
            Error::ShiftTooShort { .. } => "shift-too-short",
            Error::NiceFailed { .. } => "nice-failed",
            Error::SizeCapExceeded { .. } => "size-cap-exceeded",
            Error::ReplayFailed { .. } => "replay-failed",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }

    /// Errors caused by malformed input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidExponent(_)
                | Error::DigitOutOfRange { .. }
                | Error::LeadingZero
                | Error::Parse { .. }
                | Error::NotAFixedPoint { .. }
                | Error::OutOfDomain(_)
                | Error::InvalidArgument(_)
        )
    }
}
