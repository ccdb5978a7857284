//! Error type shared by every module of the engine.

use std::fmt;

/// Failure modes of the exact calculus.
///
/// All arithmetic is exact, so errors are structural: mismatched variable
/// alphabets, gluing misuse, enumeration bounds, or an exponential/logarithm
/// whose expansion cannot terminate under the active truncation context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalcError {
    /// Two sparse polynomials over different declared alphabets were combined.
    AlphabetMismatch(String),
    /// A gluing end carries variables of the wrong polarity
    /// (q's on the lower potential or p's on the upper one).
    UnmatchedGluingEnd(String),
    /// A combinatorial enumeration was requested beyond its feasible bound.
    DegreeOverBound { degree: u32, bound: u32 },
    /// An exponential or logarithm failed to terminate under the context.
    NonTerminating(String),
    /// A glued series has a constant term that is not 1 at h^0,
    /// so its logarithm does not exist in the ring.
    NonUnitConstant(String),
    /// A pipeline cross-check failed (glued result vs closed form, or the
    /// two independent computation paths of a descendant potential).
    PipelineMismatch(String),
}

impl fmt::Display for CalcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalcError::AlphabetMismatch(msg) => write!(f, "alphabet mismatch: {msg}"),
            CalcError::UnmatchedGluingEnd(msg) => write!(f, "unmatched gluing end: {msg}"),
            CalcError::DegreeOverBound { degree, bound } => {
                write!(f, "degree {degree} exceeds enumeration bound {bound}")
            }
            CalcError::NonTerminating(msg) => {
                write!(f, "expansion does not terminate under the truncation context: {msg}")
            }
            CalcError::NonUnitConstant(msg) => {
                write!(f, "logarithm of a series with non-unit constant term: {msg}")
            }
            CalcError::PipelineMismatch(msg) => write!(f, "pipeline cross-check failed: {msg}"),
        }
    }
}

impl std::error::Error for CalcError {}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CalcError>;
