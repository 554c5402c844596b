use thiserror::Error;

use crate::exact_arith::ArithError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GwError {
    /// A memo key re-entered its own evaluation; the recursion is not
    /// well-founded for that key, which is an engine bug.
    #[error("cyclic dependency while evaluating {0}")]
    CyclicDependency(String),
    #[error(
        "OGW_{{2,0}}(Γ2,Γ2) vanishes for these basic invariants; recursion (b) cannot divide by it"
    )]
    DivisorZero,
    #[error("WDVV reconstruction failure at degree {degree}: {reason}")]
    Reconstruction { degree: u32, reason: String },
    #[error("cohomology index {0} out of range 0..=3")]
    IndexOutOfRange(usize),
    #[error("degree {beta} exceeds the configured cap {cap}")]
    BetaCap { beta: u32, cap: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T, E = GwError> = std::result::Result<T, E>;
