use thiserror::Error;

/// Errors raised by constructors and operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem instance or argument violated a domain precondition.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A sampling grid is too coarse to resolve the requested modes.
    #[error("grid of {n} points cannot resolve modes up to order {order} (need n >= {min})")]
    GridTooCoarse { n: usize, order: usize, min: usize },

    /// A loop and a mass system disagree about the fundamental period.
    #[error("loop period {loop_period} does not match system period {system_period}")]
    PeriodMismatch { loop_period: f64, system_period: f64 },

    /// The Jacobi field had no zero in the searched window. Cannot occur
    /// for positive masses; reported as an internal-consistency failure.
    #[error("no conjugate point found in (0, {span}]")]
    NoConjugatePoint { span: f64 },

    /// A certificate precondition failed.
    #[error("non-minimality certificate unavailable: {0}")]
    CertificateUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
