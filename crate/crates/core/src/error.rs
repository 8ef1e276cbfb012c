use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("unknown tensor factor `{0}`")]
    UnknownFactor(String),

    #[error("duplicate tensor factor `{0}`")]
    DuplicateFactor(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different tensor spaces")]
    SpaceMismatch,

    #[error("operator is not Hermitian (max |H - H^dag| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("space has no qubit factor")]
    MissingQubit,

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unphysical field: transition frequency {frequency} MHz is not positive")]
    UnphysicalField { frequency: f64 },

    #[error("dispersive regime violated: {what} = {value} must be positive")]
    RegimeViolation { what: &'static str, value: f64 },

    #[error("squeezed frame undefined: squeezing beta = {beta} must exceed 2")]
    SqueezedFrameUndefined { beta: f64 },

    #[error("exact spin model limited to {max} spins, requested {requested}")]
    TooManySpins { requested: usize, max: usize },

    #[error("generator residual {measured:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { measured: f64, tolerance: f64 },

    #[error("invalid state specification: {0}")]
    InvalidState(String),
}

impl Error {
    /// True for violations of a numerical contract (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. } | Error::NotNormalized { .. } | Error::ResidualTooLarge { .. }
        )
    }
}
