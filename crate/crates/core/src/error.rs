use thiserror::Error;

/// Errors raised by the solver, the profile reconstruction and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketing root search ran out of iterations.
    #[error(
        "root search did not converge after {iterations} iterations (bracket [{lo:e}, {hi:e}], target {target:e})"
    )]
    RootNotConverged {
        lo: f64,
        hi: f64,
        target: f64,
        iterations: usize,
    },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed on [{a}, {b}]: {reason}")]
    Quadrature { a: f64, b: f64, reason: String },

    /// The ODE integrator could not continue.
    #[error("integration failed at r = {at}: {reason}")]
    Integration { at: f64, reason: String },

    /// Doubling the candidate speed never produced a negative terminal value.
    #[error("no upper bracket for the wave speed below c_max = {c_max:e} (last terminal value {last_terminal:e})")]
    NoUpperBracket { c_max: f64, last_terminal: f64 },

    /// The reaction law failed KPP validation.
    #[error("reaction law is not admissible: {0}")]
    InvalidReaction(String),

    /// Inputs are individually valid but contradict each other.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    /// Invalid simulation or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The explicit step size violates the stability bound.
    #[error("time step {dt:e} exceeds the admissible step {admissible:e}")]
    Cfl { dt: f64, admissible: f64 },

    /// The tracked front left the computational domain.
    #[error("front left the domain at t = {t}; enlarge the grid")]
    FrontLost { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
