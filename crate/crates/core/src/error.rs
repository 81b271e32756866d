use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} = {value} out of range ({range})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("singular parameter choice: {0}")]
    SingularParameters(String),

    #[error("no-jump Hamiltonian is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("integration step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {steps} steps before t = {t}")]
    TooManySteps { steps: usize, t: f64 },

    #[error("trace drifted by {drift:.3e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("fidelity maximum at the edge of the sampling window (t = {0})")]
    InconclusiveWindow(f64),

    #[error("ambiguous spectral gap: candidate rates {0:.6e} and {1:.6e}")]
    SpectralAmbiguity(f64, f64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("phase combination vanishes, no gate can be formed")]
    NoGate,

    #[error(
        "calibration did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("calibration Jacobian is singular")]
    SingularJacobian,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// Failures of numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned(_)
                | Error::StepUnderflow { .. }
                | Error::TooManySteps { .. }
                | Error::TraceDrift { .. }
                | Error::InconclusiveWindow(_)
                | Error::SpectralAmbiguity(..)
                | Error::Eigen(_)
                | Error::NonConvergence { .. }
                | Error::SingularJacobian
                | Error::SingularParameters(_)
                | Error::NoGate
        )
    }
}
