use thiserror::Error;

use crate::correlations::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle {value} outside [{min}, {max}]")]
    Domain { value: f64, min: f64, max: f64 },

    #[error("state norm^2 {0} is not within tolerance of 1")]
    NotNormalized(f64),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("basis matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("setting `{0}` carries no measurement basis")]
    NoBasis(String),

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("moments imply probabilities outside [0, 1]: {0:?}")]
    InfeasibleMoments([f64; 4]),

    #[error("correlation coefficient undefined: zero variance for {0}")]
    ZeroVariance(Side),

    #[error("invalid correlation array: {0}")]
    InvalidArray(String),

    #[error("array is signaling (max marginal discrepancy {0:e})")]
    Signaling(f64),

    #[error("relabeling is not a bijection: {0}")]
    NotBijective(String),

    #[error("scenario needs at least one setting per side")]
    EmptyScenario,

    #[error("invalid raffle: {0}")]
    InvalidRaffle(String),

    #[error("direction vector is not unit length (norm {0})")]
    NonUnitDirection(f64),

    #[error("invalid region request: {0}")]
    InvalidRegion(String),

    #[error("linear program: {0}")]
    Lp(String),
}
