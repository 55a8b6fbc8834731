use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mode label {0:?}: labels must be nonempty and contain no whitespace or parentheses")]
    InvalidMode(String),

    #[error("mode {0} is not part of the Fock basis")]
    UnknownMode(String),

    #[error("cutoff {cutoff} too small for degree {degree} in mode {mode}")]
    CutoffTooSmall {
        mode: String,
        degree: usize,
        cutoff: usize,
    },

    #[error("invalid Fock basis: {0}")]
    InvalidBasis(String),

    #[error("gain magnitude {0} is outside the perturbative regime (|D| < 1)")]
    GainOutOfRange(f64),

    #[error("beam splitter is not lossless: |r|^2+|t|^2 = {norm}, Re(r t*) = {cross}")]
    NonUnitary { norm: f64, cross: f64 },

    #[error("path delay phase must be finite, got {0}")]
    NonFinitePhase(f64),

    #[error("crystals share mode {0}")]
    ModeCollision(String),

    #[error("correlator has imaginary residue {0:e}")]
    NonHermitianResidue(f64),

    #[error("coincidence rate {0:e} is negative beyond rounding")]
    NegativeRate(f64),

    #[error("vacuum decomposition needs a single pumped crystal")]
    NotSingleCrystal,

    #[error("fit window covers {periods:.2} fringe periods, need at least 2")]
    InsufficientFringes { periods: f64 },

    #[error("scan result carries no simulated counts")]
    MissingCounts,

    #[error("singular normal equations in visibility fit")]
    SingularFit,

    #[error("invalid scan configuration: {0}")]
    InvalidScan(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
