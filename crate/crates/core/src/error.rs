use crate::farey::{PrimitiveClass, Vector};

/// Every failure mode of the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("the zero vector has no projective class")]
    ZeroVector,
    #[error("height bound {height} needs about {estimate} classes, over the budget of {budget}")]
    BoundTooLarge { height: u64, estimate: u64, budget: u64 },
    #[error("{u:?} and {v:?} are not Farey neighbours (det = {det})")]
    DeterminantViolation { u: Vector, v: Vector, det: i128 },
    #[error("traces do not satisfy x^2+y^2+z^2 = xyz (relative residual {residual:e})")]
    NotOnVariety { residual: f64 },
    #[error("trace {which} = {value} is not hyperbolic (needs > 2)")]
    NonHyperbolic { which: &'static str, value: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("could not certify {what} within {max_bits} bits")]
    PrecisionExhausted { what: String, max_bits: u32 },
    #[error("sink descent did not terminate within {steps} flips")]
    DescentBudgetExceeded { steps: u64 },
    #[error("operation is only defined on the modular torus")]
    ModularOnly,
    #[error("{u:?} and {v:?} do not form a unimodular basis (det = {det})")]
    DegenerateBasis { u: Vector, v: Vector, det: i128 },
    #[error("turn between {u:?} and {v:?} could not be placed in [0, pi)")]
    TurnAmbiguous { u: Vector, v: Vector },
    #[error("{m} is not a Markoff number reachable in the tree")]
    NotMarkoff { m: String },
    #[error("equality of traces among {} classes could not be decided", cluster.len())]
    EqualityUndecidable { cluster: Vec<PrimitiveClass> },
    #[error("rational directions have infinite flatness exponent")]
    RationalTarget,
    #[error("reference support line moved by {change:e} between depths")]
    SupportUnstable { change: f64 },
    #[error("continued-fraction construction needs {needed_bits} bits, budget is {budget_bits}")]
    OverflowBudget { needed_bits: u64, budget_bits: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Failures caused by running out of precision or computation budget
    /// rather than by invalid input.
    pub fn is_precision_failure(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted { .. }
                | Error::DescentBudgetExceeded { .. }
                | Error::TurnAmbiguous { .. }
                | Error::EqualityUndecidable { .. }
                | Error::SupportUnstable { .. }
                | Error::OverflowBudget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
