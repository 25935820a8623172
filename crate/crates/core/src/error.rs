use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The local gap `|h|` (or the distance of the Fermi energy to the
    /// spectrum) dropped below the tolerance.
    #[error("gap closed at k = {k:?}, q = {q:?} (gap {gap:.3e})")]
    GapClosed { k: Vec<f64>, q: Vec<f64>, gap: f64 },

    /// The model contains matrix terms outside `span{I, Σ_j}`.
    #[error("model is not of two-band Clifford form (projection residual {residual:.3e})")]
    NotTwoBand { residual: f64 },

    #[error("model is not Hermitian: {0}")]
    NotHermitian(String),

    /// A grid is too coarse to resolve the requested quantity.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// The embedded torus passes through a zero of `(h_1, h_2)`.
    #[error("degenerate embedding: (h1, h2) vanishes at {point:?}")]
    DegenerateEmbedding { point: Vec<f64> },

    /// Two independent methods gave different integers.
    #[error("method disagreement: {0}")]
    MethodDisagreement(String),

    #[error("projections are not connectable: distance {distance:.6} >= 1")]
    NotConnectable { distance: f64 },

    #[error("integrator step rejected: projector drift {drift:.3e}")]
    StepSize { drift: f64 },

    /// A real-valued result sits too close to a half-integer to be snapped.
    #[error("ambiguous integer: component {component} = {value}")]
    AmbiguousInteger { component: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by the numerics (as opposed to bad input or
    /// internal inconsistencies between methods).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GapClosed { .. }
                | Error::Resolution(_)
                | Error::DegenerateEmbedding { .. }
                | Error::NotConnectable { .. }
                | Error::StepSize { .. }
                | Error::AmbiguousInteger { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
