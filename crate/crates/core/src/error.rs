use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: need {needed} time levels, got {available}")]
    InsufficientData { needed: usize, available: usize },

    /// No degree up to `r_max` gave a consistent annihilator system.
    #[error("no annihilator of degree <= {r_max} (best relative residual {best_residual:.3e})")]
    NoAnnihilator { r_max: usize, best_residual: f64 },

    #[error("ill-conditioned input: {0}")]
    Conditioning(String),

    /// The window `L` is too short for the recurrence at this index.
    #[error("span condition violated at index {index} (relative residual {residual:.3e})")]
    SpanConditionViolated { index: usize, residual: f64 },

    #[error("ambiguous ordering: found {found} distinct spectral values, expected {expected}")]
    AmbiguousOrdering { found: usize, expected: usize },

    #[error("spectrum is not real (max imaginary part {max_imag:.3e})")]
    NotSymmetricReal { max_imag: f64 },

    /// Repeated Vandermonde nodes inside one residue class.
    #[error("signal under-determined in residue class {class} (node separation {separation:.3e})")]
    UnderDetermined { class: usize, separation: f64 },

    #[error("root at distance {distance:.3e} from the nearest root of unity")]
    NotShiftSpectrum { distance: f64 },

    #[error("support does not explain the samples (relative residual {residual:.3e})")]
    SupportMismatch { residual: f64 },
}
