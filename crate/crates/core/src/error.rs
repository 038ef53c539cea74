use thiserror::Error;

/// Errors raised by model construction and the work-extraction computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),

    #[error("invalid system specification: {0}")]
    InvalidSystem(String),

    #[error("invalid diagonal state: {0}")]
    InvalidState(String),

    #[error("invalid bath specification: {0}")]
    InvalidBath(String),

    #[error("energy {energy} is not commensurate with the bath grid spacing {spacing}")]
    IncommensurateEnergy { energy: f64, spacing: f64 },

    #[error("energy shell at E = {energy} is empty: {reason}")]
    EmptyShell { energy: f64, reason: String },

    #[error("failure probability must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("spectra have different traces: {left} vs {right}")]
    TraceMismatch { left: f64, right: f64 },

    #[error("block-wise rank {computed} disagrees with the closed form {closed_form}")]
    ClosedFormMismatch { computed: f64, closed_form: f64 },

    #[error("state has no probability weight")]
    DegenerateState,

    #[error("invalid mixed-cell range: {0}")]
    InvalidRange(String),

    #[error("work distribution has mass at l = {level} outside the scheme range [{lo}, {hi}]")]
    UnsupportedRange { level: u32, lo: u32, hi: u32 },

    #[error("invalid work distribution: {0}")]
    InvalidDistribution(String),

    #[error("value {value} is not on the weight ladder")]
    OffGrid { value: f64 },

    #[error("invalid staircase schedule: {0}")]
    InvalidSchedule(String),

    #[error("shell dimension {dimension} exceeds the oracle cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("exact vectors differ: {0}")]
    ExactMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
