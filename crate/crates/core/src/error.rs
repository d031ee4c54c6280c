use thiserror::Error;

/// Errors produced by the solvers and the scenario front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on {context}: estimated error {estimate:.3e} above target {target:.3e}")]
    NumericalFailure {
        context: String,
        estimate: f64,
        target: f64,
    },

    #[error("propagator norm {norm:.6} exceeded bound at step {step}; reduce dt")]
    Instability { step: usize, norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Born-Markov reference undefined: {0}")]
    BornMarkovUndefined(String),

    #[error("spectrum evaluated on a bound-state pole at energy {0}")]
    Pole(f64),

    #[error("Fock cutoff too small: top-level population {population:.3e} at t = {time}")]
    CutoffOverflow { population: f64, time: f64 },

    #[error("invalid configuration: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
