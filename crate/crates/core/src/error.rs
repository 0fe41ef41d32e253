use crate::scalar::ScalarParseError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("atom count mismatch: expected {expected}, found {found}")]
    AtomCountMismatch { expected: usize, found: usize },
    #[error("a measure space needs at least one atom")]
    EmptySpace,
    #[error("weight at atom {atom} is negative or not finite")]
    InvalidWeight { atom: usize },
    #[error("value at atom {atom} is not finite")]
    NonFiniteValue { atom: usize },
    #[error("atom {atom} is out of range for a space of {atom_count} atoms")]
    AtomOutOfRange { atom: usize, atom_count: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("Lp exponent must be at least 1")]
    InvalidExponent,
    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: usize, right: usize },
    #[error("process rows have unequal lengths")]
    RaggedProcess,
    #[error("filtration is not monotone between steps {step} and {next}", next = step + 1)]
    NonMonotoneFiltration { step: usize },
    #[error("filtration step {step} is finer than the ambient σ-algebra")]
    FiltrationExceedsAmbient { step: usize },
    #[error("the conditioning σ-algebra is not contained in the ambient one")]
    NotSubSigmaAlgebra,
    #[error("process is not adapted at time {time}")]
    NotAdapted { time: usize },
    #[error("process is not predictable at time {time}")]
    NotPredictable { time: usize },
    #[error("expected a {expected}, but the process classifies as {found}")]
    WrongClass { expected: String, found: String },
    #[error("not a stopping time: {{τ ≤ {time}}} is not measurable at step {time}")]
    NotStoppingTime { time: usize },
    #[error("stopping time is infinite at atom {atom}; bounded times are required")]
    UnboundedStoppingTime { atom: usize },
    #[error("stopping times are not ordered at atom {atom}")]
    UnorderedStoppingTimes { atom: usize },
    #[error("time {time} exceeds horizon {horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("function is not measurable with respect to the limit σ-algebra")]
    NotLimitMeasurable,
    #[error("{size} atoms exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Parse(#[from] ScalarParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
