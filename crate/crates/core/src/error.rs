use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{what} is not Hermitian (max |H - H^dagger| entry = {max_dev:.3e})")]
    NonHermitianHamiltonian { what: String, max_dev: f64 },
    #[error("negative rate {0}")]
    NegativeRate(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("static Hamiltonian is not diagonal (max off-diagonal entry = {0:.3e})")]
    NonDiagonalStaticHamiltonian(f64),
    #[error("ambiguous state classification: {0}")]
    AmbiguousState(String),
    #[error("reversed interval: t_from = {t_from}, t_to = {t_to}")]
    ReversedInterval { t_from: f64, t_to: f64 },
    #[error("insertion time {time} outside window [{lower}, {upper}]")]
    TimeOutsideWindow { time: f64, lower: f64, upper: f64 },
    #[error("channel index {channel} out of range (N_L = {n_channels})")]
    ChannelOutOfRange { channel: usize, n_channels: usize },
    #[error("basis index {index} out of range (dim = {dim})")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("state {0} is not a ground state")]
    NotGroundState(usize),
    #[error("drive does not vanish outside [0, T_P]: {0}")]
    DriveNotConfined(String),
    #[error("grid too coarse: estimated quadrature error {estimate:.3e} exceeds {limit:.3e}")]
    GridTooCoarse { estimate: f64, limit: f64 },
    #[error("grid does not cover required region: {0}")]
    GridCoverage(String),
    #[error("photon-number truncation overflow: {0}")]
    TruncationOverflow(String),
    #[error("plane-wave response requires an undriven system")]
    DrivenSpecUnsupported,
    #[error("lattice dimension {dim} exceeds guard {guard}")]
    DimensionGuardExceeded { dim: u128, guard: u128 },
    #[error("interval [{t_from}, {t_to}] not aligned to bins of width {dx}")]
    MisalignedInterval { t_from: f64, t_to: f64, dx: f64 },
    #[error("insertion at t = {time} not on a bin boundary (dx = {dx})")]
    MisalignedInsertion { time: f64, dx: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
