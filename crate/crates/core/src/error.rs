use thiserror::Error;

/// Errors produced by the decision toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} is a perfect square or zero; it defines no quadratic field")]
    NotQuadratic(String),
    #[error("field tower too large (degree would exceed 4)")]
    FieldTowerTooLarge,
    #[error("field generators are dependent modulo squares")]
    DependentGenerators,
    #[error("element is not integral at the prime above {0}")]
    NotIntegral(u64),
    #[error("singular model (discriminant is zero)")]
    SingularModel,
    #[error("bad reduction at the prime above {0}")]
    BadReduction(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("supersingular: Frobenius field is not quadratic imaginary over the prime field")]
    Supersingular,
    #[error("mismatched fields: {0}")]
    FieldMismatch(String),
    #[error("bound infeasible: effective bound exceeds the enumeration ceiling {ceiling}")]
    BoundInfeasible { ceiling: u64 },
    #[error("roots of unity excluded: discriminant {0} has extra roots of unity")]
    RootsOfUnityExcluded(i64),
    #[error("quadratic field of discriminant {0} is not contained in the working field")]
    FieldNotContained(i64),
    #[error("integer too large for the supported range: {0}")]
    Overflow(String),
    #[error("unsupported local structure: {0}")]
    Unsupported(String),
    #[error("cache corruption: {0}")]
    CacheCorruption(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
