use thiserror::Error;

/// Errors raised by series arithmetic, form construction and the analyses built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("leading q-coefficient is not a unit monomial: {0}")]
    NonUnitLeading(String),

    /// A coefficient at or past the truncation order was requested.
    #[error("q-exponent {requested} is beyond the truncation order {truncation}; at least order {required} is needed")]
    BeyondTruncation {
        requested: String,
        truncation: String,
        required: i64,
    },

    #[error("term q^{q} y^{y} has a non-integral exponent")]
    NonIntegralExponent { q: String, y: String },

    #[error("cannot expand an exact non-monomial series to infinite precision")]
    UnboundedPrecision,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("polar-term count mismatch for m={m}, P={threshold}: enumeration {enumerated}, formula {formula}")]
    FormulaMismatch {
        m: i64,
        threshold: i64,
        enumerated: i64,
        formula: i64,
    },

    #[error("non-integral value: {0}")]
    NonIntegral(String),

    #[error("division by {divisor} is not exact: {context}")]
    NonIntegralDivision { divisor: String, context: String },

    #[error("generating function disagrees with the direct coefficient sum at q^{exponent}: {generating} vs {direct}")]
    MismatchWithDirectSum {
        exponent: String,
        generating: String,
        direct: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
