use thiserror::Error;

/// Errors raised by the physics, signal and sweep layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The optical frequency sits exactly on a D1 line center.
    #[error("singular detuning: {nu_ghz} GHz coincides with a line center")]
    SingularDetuning { nu_ghz: f64 },

    #[error("no resonance: the differential light-shift cross-section vanishes at this detuning")]
    NoResonance,

    #[error("resonance unreachable: the light shift drives the manifolds apart for this handedness")]
    UnreachableResonance,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for configuration and input problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularDetuning { .. }
            | Error::NoResonance
            | Error::UnreachableResonance
            | Error::DegenerateInput(_) => 3,
            Error::InvalidInput(_) | Error::Config(_) | Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
