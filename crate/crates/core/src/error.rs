use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The scattering denominator vanished; only happens for unphysical
    /// all-zero-rate configurations.
    #[error("degenerate scattering denominator (|D| = {magnitude:e})")]
    DegenerateDenominator { magnitude: f64 },

    #[error("steady-state system is singular at resonance with no drive on a coupled path")]
    SingularAtResonance,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Loss came out noticeably negative, which means a solver bug.
    #[error("flux invariant broken: 1 - sum |T|^2 = {loss:e}")]
    InvariantBroken { loss: f64 },

    #[error("step too large: excitation residual {residual:e} exceeds {tolerance:e} at dt = {dt} (reduce dt)")]
    StepTooLarge {
        residual: f64,
        tolerance: f64,
        dt: f64,
    },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("insufficient spectral weight at detuning {delta}: |IN| / peak = {relative:e}")]
    InsufficientSpectralWeight { delta: f64, relative: f64 },

    #[error(
        "atom still excited at end of window (population {population:e}); lengthen the window"
    )]
    IncompleteEmission { population: f64 },

    #[error("non-positive input: {0}")]
    NonPositiveInput(String),

    #[error("no convergence after {iterations} iterations (best residual {residual:e}, rabi ratios {rabi_ratios:?})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        rabi_ratios: Vec<f64>,
    },

    #[error("unsatisfiable target: {0}")]
    UnsatisfiableTarget(String),
}
