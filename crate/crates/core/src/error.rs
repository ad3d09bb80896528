use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} must be {requirement}, got {value}")]
    NonPositiveInput {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("transverse trap frequency undefined: B'^2 - B0*B''/2 = {margin:e} T^2/m^2 must be positive")]
    TransverseTrapUndefined { margin: f64 },

    #[error("total angular momentum J = I*omega_S/hbar + S = {j:e} must be positive")]
    NegativeJ { j: f64 },

    #[error("coupling matrix is not symmetric at ({row}, {col}): {upper:e} vs {lower:e}")]
    AsymmetricInput {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("tolerance {0:e} outside (0, 1e-4)")]
    InvalidTolerance(f64),

    #[error("root solver failed: {0}")]
    RootSolverFailure(String),

    #[error("point is not stable: {0}")]
    NotStable(String),

    #[error("eigenvector G-norm {norm:e} below tolerance (stability boundary)")]
    ZeroNormVector { norm: f64 },

    #[error("bracket [{lo:e}, {hi:e}] has the same classification ({class}) at both ends")]
    NoSignChange { lo: f64, hi: f64, class: String },

    #[error("mode {mode} covariance block has non-positive determinant {det:e}")]
    NonPositiveBlockDeterminant { mode: usize, det: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than I/O or numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveInput { .. }
                | Error::TransverseTrapUndefined { .. }
                | Error::NegativeJ { .. }
                | Error::InvalidTolerance(_)
                | Error::InvalidGrid(_)
                | Error::Config(_)
                | Error::NoSignChange { .. }
        )
    }
}
