use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `m²ω²/4 + m²Ωω` (or its m-free analogue) is not strictly positive.
    #[error("non-positive radicand {radicand:e} for omega = {omega}: no decaying bound-state scale")]
    NonPositiveRadicand { omega: f64, radicand: f64 },

    #[error("delta must be strictly positive, got {0}")]
    NonPositiveDelta(f64),

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("wavefunction tail has not decayed: |F(R)| = {tail:e}, max |F| = {peak:e}")]
    TailNotDecayed { tail: f64, peak: f64 },

    #[error("no positive root of the constraint polynomial for n = {n}, |l| = {l_abs}")]
    NoPositiveRoot { n: u32, l_abs: u32 },

    #[error("scalar-potential strength is zero; use the Landau limit instead")]
    ZeroTheta,

    #[error("Landau limit requires a vanishing scalar potential, got theta = {0}")]
    ThetaNotZero(f64),

    #[error("grid too coarse: h = {h} exceeds {max}")]
    GridTooCoarse { h: f64, max: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "eigenvalue bisection did not converge for index {index} after {iterations} iterations (bracket [{lo}, {hi}])"
    )]
    ConvergenceFailure {
        index: usize,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    #[error("no eigenvalue near {target}: nearest is {nearest} at index {index}")]
    NoMatchingEigenvalue { target: f64, nearest: f64, index: usize },
}
