use core::fmt;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix that must be symmetric (or Hermitian) is not.
    NotSymmetric { asymmetry: f64 },
    /// The trap potential has a non-positive principal value.
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// An axis vector has zero or non-finite length.
    InvalidAxis,
    /// A scalar parameter is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// Only 3x3 and 6x6 complex eigenproblems are supported.
    UnsupportedSize(usize),
    /// An iterative eigensolver did not converge.
    NoConvergence,
    /// Repeated eigenvalue without a full set of eigenvectors.
    DegenerateSpectrum,
    /// The rotation axis is not along a principal axis of the trap.
    NotAxisAligned,
    /// The rotation rate does not satisfy the resonance condition.
    NotResonant { residual: f64 },
    /// The rotation axis is vertical: gravity has no rotating component.
    NoResonantDrive,
    /// Too few envelope peaks to fit a growth rate.
    InsufficientData { found: usize, required: usize },
    /// A constructed solution fails its defining equations.
    ResidualTooLarge { residual: f64, limit: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (relative asymmetry {asymmetry:e})")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "trap potential is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
            ),
            Error::InvalidAxis => f.write_str("rotation axis must be a finite non-zero vector"),
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {value} for parameter `{name}`")
            }
            Error::UnsupportedSize(n) => write!(f, "unsupported matrix size {n} (expected 3 or 6)"),
            Error::NoConvergence => f.write_str("eigenvalue iteration did not converge"),
            Error::DegenerateSpectrum => {
                f.write_str("degenerate spectrum: repeated eigenvalue without a complete eigenbasis")
            }
            Error::NotAxisAligned => f.write_str("rotation axis is not along a principal axis of the trap"),
            Error::NotResonant { residual } => write!(
                f,
                "rotation rate is not resonant (relative smallest eigenvalue {residual:e})"
            ),
            Error::NoResonantDrive => {
                f.write_str("no resonant drive: gravity has no component transverse to the rotation axis")
            }
            Error::InsufficientData { found, required } => write!(
                f,
                "insufficient data: found {found} envelope peaks, need at least {required}"
            ),
            Error::ResidualTooLarge { residual, limit } => {
                write!(f, "residual {residual:e} exceeds limit {limit:e}")
            }
        }
    }
}

impl core::error::Error for Error {}
