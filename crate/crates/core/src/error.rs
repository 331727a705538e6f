use alloc::boxed::Box;
use alloc::string::String;

use crate::kernels::FeasibilityReport;

/// Everything that can go wrong in the core pipelines.
///
/// Mathematical negatives (an infeasible moment map) carry the report that
/// decided them so callers can still emit a certificate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("operator does not preserve the null space (residual {residual:e})")]
    NotWellDefined { residual: f64 },

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("index set is not admissible: {0}")]
    NotAdmissible(String),

    #[error("lambda_{{{j}{i}}} is zero or missing")]
    ZeroLambda { j: usize, i: usize },

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("moment map is not vector valued (d_in = {d_in})")]
    NotVectorValued { d_in: usize },

    #[error("invalid moment map: {0}")]
    InvalidMoments(String),

    #[error("word set has {size} elements, above the cap of {cap}")]
    SigmaTooLarge { size: usize, cap: usize },

    #[error("(Sigma, P_h) is not an admissible pair")]
    NotAdmissiblePair,

    #[error("moment map is infeasible: K2 - K1 has min eigenvalue {:e}", .0.min_eigenvalue)]
    InfeasibleMoments(Box<FeasibilityReport>),

    #[error("moment map admits no *-representation: ||K1 - K2|| = {:e}", .0.residual_norm)]
    NotStarFeasible(Box<FeasibilityReport>),

    #[error("Toeplitz kernel is not positive semidefinite (min eigenvalue {:e})", .0.min_eigenvalue)]
    ToeplitzNotPsd(Box<FeasibilityReport>),

    #[error("ideal relations fail (worst residual {:e})", .relations.residual_norm)]
    RelationsFail {
        relations: Box<FeasibilityReport>,
        dominance: Box<FeasibilityReport>,
    },

    #[error("L(g_0) is not the identity (deviation {residual:e})")]
    EmbedNotIsometric { residual: f64 },

    #[error("Gamma(0) is not the identity (deviation {residual:e})")]
    GammaZeroNotIdentity { residual: f64 },

    #[error("truncation depth {depth} is below the required {required}")]
    DepthTooSmall { depth: usize, required: usize },

    #[error("unknown instance kind: {0}")]
    BadKind(String),
}

impl Error {
    /// True for clean mathematical negatives, as opposed to malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleMoments(_)
                | Error::NotStarFeasible(_)
                | Error::ToeplitzNotPsd(_)
                | Error::RelationsFail { .. }
        )
    }

    /// The report attached to an infeasibility error, if any.
    pub fn report(&self) -> Option<&FeasibilityReport> {
        match self {
            Error::InfeasibleMoments(r) | Error::NotStarFeasible(r) | Error::ToeplitzNotPsd(r) => {
                Some(r)
            }
            Error::RelationsFail { relations, .. } => Some(relations),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
