use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite coordinate in group element")]
    NonFinite,

    #[error("Fock truncation inadequate: {0}")]
    TruncationInadequate(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    WeightNormalization { sum: f64 },

    #[error("function does not decay at the grid boundary (boundary/peak = {ratio:.3e}, limit {limit:.1e})")]
    BoundaryDecay { ratio: f64, limit: f64 },

    #[error("negativity beyond tolerance (minimum {minimum:.3e}, limit {limit:.1e})")]
    Negativity { minimum: f64, limit: f64 },

    #[error("composed element ({eta:.4}, {xi:.4}) lies outside the sampled domain")]
    OutsideDomain { eta: f64, xi: f64 },

    #[error("grids are incompatible: {0}")]
    GridMismatch(String),

    #[error("imaginary residue {residue:.3e} exceeds tolerance {limit:.1e}")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("reality condition violated (max defect {defect:.3e})")]
    RealityViolation { defect: f64 },

    #[error("differentiation stencil does not fit in a grid of {points} points")]
    StencilOutOfRange { points: usize },

    #[error("grid cannot resolve the evolved state: {0}")]
    GridInadequate(String),

    #[error("normalization drift {drift:.3e} exceeds {limit:.1e}")]
    NormalizationDrift { drift: f64, limit: f64 },

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}
