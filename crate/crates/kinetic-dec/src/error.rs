use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is out of range.
    InvalidConfig(&'static str),
    /// A state that the system rejects (negative density, NaN, ...).
    NotAdmissible { node: usize },
    NonFinite { what: &'static str, index: usize },
    /// The discrete velocity model does not reproduce the fluxes.
    InconsistentModel { residual: f64 },
    /// Denominator of an amplification factor vanished.
    Pole,
    FactorialOverflow { n: usize },
    DomainMismatch,
    ShapeMismatch,
    /// Time stepping produced an unusable state even after the fallbacks.
    Breakdown { step: usize, time: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NotAdmissible { node } => write!(f, "non-admissible state at node {node}"),
            Error::NonFinite { what, index } => write!(f, "non-finite {what} at index {index}"),
            Error::InconsistentModel { residual } => {
                write!(f, "kinetic model fails the moment relations (residual {residual:e})")
            }
            Error::Pole => f.write_str("amplification factor has a pole at this symbol value"),
            Error::FactorialOverflow { n } => write!(f, "stencil too wide (r + s = {n})"),
            Error::DomainMismatch => f.write_str("grid does not match the case domain"),
            Error::ShapeMismatch => f.write_str("field shapes do not match"),
            Error::Breakdown { step, time } => {
                write!(f, "solver breakdown at step {step} (t = {time})")
            }
        }
    }
}

impl core::error::Error for Error {}
