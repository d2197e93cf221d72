use core::fmt;

/// Errors raised by the core library.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Operand lengths disagree.
    Dimension { expected: usize, found: usize },
    /// A trit value outside `{0,1,2}`.
    InvalidTrit(u8),
    NotAPermutation,
    /// Parameters violate an operation's precondition.
    Parameter(&'static str),
    /// No asymptotic solution or no admissible algorithm parameters.
    Infeasible(&'static str),
    /// Exhaustive enumeration would exceed its size bound.
    TooLarge,
    /// Random full-rank sampling failed repeatedly.
    RankDeficient,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidTrit(t) => write!(f, "invalid trit value {t}"),
            Error::NotAPermutation => f.write_str("not a permutation"),
            Error::Parameter(m) => write!(f, "invalid parameter: {m}"),
            Error::Infeasible(m) => write!(f, "infeasible: {m}"),
            Error::TooLarge => f.write_str("instance too large for exhaustive enumeration"),
            Error::RankDeficient => f.write_str("could not sample a full-rank matrix"),
        }
    }
}
