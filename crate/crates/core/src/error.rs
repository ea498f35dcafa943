use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid angles: {0}")]
    InvalidAngles(String),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("DegenerateOrientation: direction pair is not orthogonal (|h.v| = {dot:e})")]
    DegenerateOrientation { dot: f64 },

    #[error("AzimuthDegenerate: |sin(azimuth_h - azimuth_v)| = {sin_diff:e} is too small")]
    AzimuthDegenerate { sin_diff: f64 },

    #[error("CoincidentPoints: separation {distance:e} m is below the singularity guard")]
    CoincidentPoints { distance: f64 },

    #[error(
        "QuadratureNotConverged: {nodes_per_axis} nodes/axis still changed by {rel_change:e} \
         (tolerance {rel_tol:e})"
    )]
    QuadratureNotConverged {
        nodes_per_axis: usize,
        rel_change: f64,
        rel_tol: f64,
        previous: Box<Matrix3<Complex64>>,
        last: Box<Matrix3<Complex64>>,
    },

    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("OrderingMismatch: channel is {channel:?}, vector is {vector:?}")]
    OrderingMismatch {
        channel: crate::assembly::Ordering,
        vector: crate::assembly::Ordering,
    },

    #[error("ZeroReference: reference channel has zero Frobenius norm")]
    ZeroReference,

    #[error("pair (rx {rx}, tx {tx}): {source}")]
    Pair {
        rx: usize,
        tx: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by invalid input parameters rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidAngles(_)
            | Error::InvalidSurface(_)
            | Error::InvalidQuadrature(_)
            | Error::InvalidArgument(_)
            | Error::DegenerateOrientation { .. } => true,
            Error::Pair { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    /// Strips `Pair` annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Pair { source, .. } => source.root(),
            other => other,
        }
    }
}
