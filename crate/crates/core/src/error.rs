use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field grids do not match")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("pulse duration {fwhm_fs} fs is not resolvable with a {dt_fs} fs time step")]
    Unresolvable { fwhm_fs: f64, dt_fs: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} at {wavelength_nm:.3} nm is outside the simulated band")]
    OutOfBand { what: String, wavelength_nm: f64 },

    #[error("material `{material}` is invalid over the band: {reason}")]
    InvalidDispersion { material: String, reason: String },

    #[error("delay shift of {shift_fs:.1} fs exceeds the guard band of {guard_fs:.1} fs")]
    WrapAround { shift_fs: f64, guard_fs: f64 },

    #[error("scan contains no points")]
    DegenerateScan,

    #[error("trace has no dip below its baseline")]
    NoDip,

    #[error("trace baseline is zero")]
    ZeroBaseline,

    #[error("too few points for a fit: {0} (need at least 10)")]
    TooFewPoints(usize),

    #[error("fringes are undersampled: {samples_per_fringe:.2} samples per fringe (need 8)")]
    Undersampled { samples_per_fringe: f64 },

    #[error("envelope has more than one lobe above half maximum")]
    AmbiguousEnvelope,

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the user's configuration rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::UnknownMaterial(_)
                | Error::InvalidArgument(_)
                | Error::InvalidGrid(_)
                | Error::InvalidDispersion { .. }
                | Error::OutOfBand { .. }
                | Error::Unresolvable { .. }
                | Error::DegenerateScan
        )
    }
}
