use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("theta3 series did not converge for z = {z}, q = {q}")]
    NonconvergentTheta { z: crate::C64, q: f64 },

    #[error("Fourier index {n} aliases on a grid of {n_points} points")]
    AliasRisk { n: i64, n_points: usize },

    #[error("OAM index {l} lies outside the truncation [-{l_max}, {l_max}]")]
    OutOfTruncation { l: i64, l_max: usize },

    #[error("truncation discards {leakage:e} of the state norm")]
    ExcessLeakage { leakage: f64 },

    #[error("wedge width {width} is below the resolvable minimum {min_width} at this truncation")]
    UnresolvableWedge { width: f64, min_width: f64 },

    #[error("grid of {n_points} points cannot resolve l_max = {l_max} (need at least {required})")]
    GridTooCoarse { n_points: usize, l_max: usize, required: usize },

    #[error("Wigner value at l = {l}, phi = {phi} has imaginary residue {residue:e}")]
    ImaginaryResidue { l: i64, phi: f64, residue: f64 },

    #[error("angular density {value:e} at phi = {phi} is negative")]
    NegativeDensity { phi: f64, value: f64 },

    #[error("no tomogram available for coefficient cell l = {l}, phi = {phi}")]
    MissingTomogram { l: i64, phi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
