use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A jump was requested from a state whose detection intensity is not positive.
    #[error("degenerate jump: detection intensity {rate} is not positive")]
    DegenerateJump { rate: f64 },

    #[error("step too large: jump probability {probability} per step (must be < 1)")]
    StepTooLarge { probability: f64 },

    #[error("integration diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("{} of {} trajectories failed (first: {})", failed.len(), total, failed.first().map(|(i, e)| format!("#{i}: {e}")).unwrap_or_default())]
    PartialFailure {
        total: usize,
        failed: Vec<(usize, String)>,
    },

    #[error("time grids do not align: {0}")]
    Alignment(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::PartialFailure { .. })
    }
}
