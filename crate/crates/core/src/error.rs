use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("chain of {n_sites} sites exceeds the cap of {cap} sites for {what}")]
    SizeCap {
        n_sites: usize,
        cap: usize,
        what: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("Krylov propagation did not reach tolerance {tolerance:e} (estimate {estimate:e} at dimension {dim})")]
    KrylovNotConverged {
        tolerance: f64,
        estimate: f64,
        dim: usize,
    },

    #[error("eigensolver did not converge: {0}")]
    EigenNotConverged(String),

    #[error("degenerate ground manifold could not be resolved: {0}")]
    DegeneracyResolution(String),

    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("operator does not commute with the parity operator (max |UP - PU| = {0:e})")]
    ParityBroken(f64),

    #[error("noisy drives have no single Floquet operator")]
    NoisyDrive,

    #[error("spectra are defined on different frequency grids")]
    GridMismatch,

    #[error("no prominent peak in the subharmonic window (max {max:e} < 3 x median {median:e})")]
    NoProminentPeak { max: f64, median: f64 },

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
