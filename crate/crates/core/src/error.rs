use thiserror::Error;

#[derive(Debug, Error)]
pub enum RhError {
    #[error("symbol-singular-on-circle: root at distance {distance:.3e} from the unit circle")]
    SingularOnCircle { distance: f64 },

    #[error("not divisible by (1-z)^{required}: vanishing order at 1 is {order}")]
    NotDivisible { order: String, required: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("function is not in R_{m}: {detail}")]
    NotInRm { m: i64, detail: String },

    #[error("expected an odd constraint order, got {0}")]
    EvenOrder(i64),

    #[error("not-surjective: {0}")]
    NotSurjective(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("irreducible-singularity: {0}")]
    IrreducibleSingularity(String),

    #[error("unsupported singularity: {0}")]
    UnsupportedSingularity(String),

    #[error("block structure violated: {0}")]
    BlockStructure(String),

    #[error("factorization does not verify (max coefficient defect {defect:.3e})")]
    UnverifiedFactorization { defect: f64 },

    #[error("bandwidth violation: {0}")]
    Bandwidth(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RhError>;
