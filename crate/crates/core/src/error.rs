use thiserror::Error;

use crate::Vector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ε-complex operands carry different ε ({left} vs {right})")]
    MixedEpsilon { left: i8, right: i8 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate subspace: isotropic direction {witness:?} (signature so far +{positive}/-{negative})")]
    DegenerateSubspace {
        witness: Vec<f64>,
        positive: usize,
        negative: usize,
    },

    #[error("metric is numerically singular at {point:?} (|det| = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },

    #[error("point {point:?} lies outside the chart domain: {reason}")]
    OutsideDomain { point: Vec<f64>, reason: String },

    #[error("differential has rank {rank} < {expected} at {point:?}")]
    RankDeficient {
        point: Vec<f64>,
        rank: usize,
        expected: usize,
    },

    #[error("adapted basis violates its relations (worst residual {0:e})")]
    InvalidBasis(f64),

    #[error("not an element of the first prolongation (residual {0:e})")]
    NotInProlongation(f64),

    #[error("chart validation gate failed: {0}")]
    GateFailure(String),

    #[error("Q is not parallel for this chart: connection-form fit residual {residual:e} exceeds {limit:e}")]
    NotParallel { residual: f64, limit: f64 },

    #[error("no graph placement keeps the tangent spaces J1-invariant (best residual {best:e} at {point:?})")]
    GraphPlacement { best: f64, point: Vec<f64> },

    #[error("submanifold is not maximal totally ε-complex at {point:?}: {reason}")]
    NotMaximal { point: Vec<f64>, reason: String },

    #[error("no valid sample points")]
    NoValidPoints,
}

impl Error {
    pub(crate) fn degenerate(witness: &Vector, positive: usize, negative: usize) -> Self {
        Error::DegenerateSubspace {
            witness: witness.iter().copied().collect(),
            positive,
            negative,
        }
    }
}
