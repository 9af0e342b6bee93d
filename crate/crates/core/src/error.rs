use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("ions {i} and {j} are coincident (separation {distance:.3e} m)")]
    CoincidentIons { i: usize, j: usize, distance: f64 },

    #[error("equilibrium solve did not converge after {iterations} iterations (residual {residual:.3e} J/m)")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("ions {i} and {j} crossed during iteration {iteration}")]
    IonCrossing { i: usize, j: usize, iteration: usize },

    #[error("potential is not confining: mode {mode} has eigenvalue {eigenvalue:.3e}")]
    Unconfined { mode: usize, eigenvalue: f64 },

    #[error("configuration is not at equilibrium (residual {residual:.3e} J/m above tolerance {tolerance:.3e} J/m)")]
    NotAtEquilibrium { residual: f64, tolerance: f64 },

    #[error("{what} index {index} out of range (length {len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },

    #[error("eigenvector component of ion {ion} in mode {mode} is too small to divide by ({value:.3e})")]
    NearZeroComponent { mode: usize, ion: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("resonant denominator {kind} for modes {modes:?}: relative size {relative:.3e}")]
    Resonance { kind: String, modes: Vec<usize>, relative: f64 },

    #[error("detuning must be nonzero")]
    ZeroDetuning,

    #[error("no sign change in bracket [{lo}, {hi}] (f = {f_lo:.4e}, {f_hi:.4e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root search did not converge in {iterations} iterations (best |f| = {best:.3e})")]
    RootNotConverged { iterations: usize, best: f64 },

    #[error("Fock cutoff too small: boundary population {population:.3e}")]
    CutoffTooSmall { population: f64 },

    #[error("eigenstate matching ambiguous for state {state:?}: max overlap {overlap:.3}")]
    AmbiguousOverlap { state: Vec<usize>, overlap: f64 },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
    }
}
