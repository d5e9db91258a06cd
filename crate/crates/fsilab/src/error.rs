use std::fmt;

/// Errors surfaced by grid construction, field operations and solvers.
#[derive(Debug)]
pub enum Error {
    /// Grid parameters violate the contract (odd N, N too small, L <= 0).
    GridParam(String),
    /// A field contains NaN or infinite samples.
    NonFinite(&'static str),
    /// Disk or cutoff radius too small for the grid spacing.
    UnderResolved { need: f64, got: f64 },
    /// Mean-zero compatibility condition violated.
    MeanZero { relative: f64 },
    /// Vorticity support overlaps the disk.
    SupportOverlap { distance: f64, limit: f64 },
    /// Empty time series where samples are required.
    EmptySeries,
    /// Norm exponent out of range (p < 1) or divergent Beta exponents.
    InvalidExponent(f64),
    /// Mask has no interior nodes to average over.
    ZeroMaskMass,
    /// Advective CFL violation detected during stepping.
    CflViolation { t: f64, umax: f64 },
    /// Tensor forcing does not vanish on the solid.
    ForcingOnDisk { max_on_disk: f64 },
    /// Grids of two operands do not match.
    GridMismatch,
    /// Fit window contains no samples.
    EmptyFitWindow,
    /// Picard iteration diverged.
    PicardDiverged { xnorm: f64, bound: f64 },
    /// Configuration file or schema problem.
    Config(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridParam(msg) => write!(f, "invalid grid: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite values in {what}"),
            Error::UnderResolved { need, got } => {
                write!(f, "under-resolved: need >= {need}, got {got}")
            }
            Error::MeanZero { relative } => {
                write!(f, "mean-zero condition violated (relative defect {relative:.3e})")
            }
            Error::SupportOverlap { distance, limit } => write!(
                f,
                "vorticity support too close to the disk ({distance:.3} < {limit:.3})"
            ),
            Error::EmptySeries => write!(f, "empty time series"),
            Error::InvalidExponent(p) => write!(f, "invalid exponent {p}"),
            Error::ZeroMaskMass => write!(f, "mask has zero mass"),
            Error::CflViolation { t, umax } => {
                write!(f, "CFL violation at t={t:.4} (|u|_inf={umax:.3e})")
            }
            Error::ForcingOnDisk { max_on_disk } => {
                write!(f, "tensor forcing nonzero on the disk (max {max_on_disk:.3e})")
            }
            Error::GridMismatch => write!(f, "operand grids do not match"),
            Error::EmptyFitWindow => write!(f, "no samples inside the fit window"),
            Error::PicardDiverged { xnorm, bound } => {
                write!(f, "fixed-point iteration diverged (X-norm {xnorm:.3e} > {bound:.3e})")
            }
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
