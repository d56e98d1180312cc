use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("site {site} out of range for a register of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: usize, j: usize, reason: String },

    #[error("invalid logical layout: {0}")]
    InvalidLayout(String),

    #[error("invalid pulse schedule: {0}")]
    InvalidSchedule(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigenstate tracking lost at J14 = {j14}: best overlap {overlap:.3} < 0.5")]
    TrackingAmbiguity { j14: f64, overlap: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::TrackingAmbiguity { .. } | Error::Calibration(_)
        )
    }
}
