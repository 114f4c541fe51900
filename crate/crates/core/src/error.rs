use thiserror::Error;

/// Errors shared across the analysis chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {message}")]
    InvalidInput { name: &'static str, message: String },

    /// Sideband ratio at or above 1 cannot come from a thermal state; it
    /// usually signals collision-dominated or otherwise non-thermal data.
    #[error("sideband ratio {ratio} is saturated (r >= 1); occupation is undefined for non-thermal data")]
    SaturatedRatio { ratio: f64 },

    /// The collision expressions hold only for gamma_e * t_D < 1.
    #[error("collision model requires gamma_e * t_D < 1, got {value}")]
    ModelValidity { value: f64 },

    #[error("need at least {needed} {what}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("rank-deficient fit: {message}")]
    RankDeficient { message: String },

    #[error("fit did not converge after {iterations} iterations (last relative step {last_step:.3e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error(
        "Fock cutoff {n_max} leaves thermal tail {tail:.3e} (limit {limit:.1e}) for nbar = {nbar}"
    )]
    FockCutoff {
        n_max: usize,
        tail: f64,
        limit: f64,
        nbar: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            name,
            message: message.into(),
        }
    }

    /// Stable lowercase category token, e.g. for machine-readable CLI errors.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput { .. } => "input",
            Error::SaturatedRatio { .. } => "saturated-ratio",
            Error::ModelValidity { .. } => "model-validity",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::NonConvergence { .. } => "non-convergence",
            Error::FockCutoff { .. } => "fock-cutoff",
        }
    }
}
