use thiserror::Error;

/// Errors raised by the numerics in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "Matsubara resonance: nu_{index} = 2*pi*{index}/beta coincides with gamma = {gamma} \
         (cot(beta*gamma/2) has a pole); include at least {index} Matsubara terms so the \
         degenerate pair is combined through its analytic limit"
    )]
    Resonance { index: usize, gamma: f64 },

    #[error("integration did not converge: residual estimate {residual:e} exceeds tolerance {tolerance:e} ({context})")]
    Integration {
        residual: f64,
        tolerance: f64,
        context: &'static str,
    },

    #[error("frequency {omega} lies outside the tabulated grid [{min}, {max}]")]
    Extrapolation { omega: f64, min: f64, max: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid superoperator: {0}")]
    InvalidSuperoperator(String),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Resonance { .. } => "resonance",
            Error::Integration { .. } => "integration",
            Error::Extrapolation { .. } => "extrapolation",
            Error::InvalidState(_) => "invalid-state",
            Error::InvalidSuperoperator(_) => "invalid-superoperator",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
