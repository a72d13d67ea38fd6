use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The circulant embedding produced eigenvalues below the tolerance.
    #[error("circulant embedding has a negative eigenvalue ({min:e}, largest {max:e})")]
    EmbeddingNotNonnegative { min: f64, max: f64 },

    /// Not enough data for the requested octave range.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Fewer usable octaves than the estimator needs.
    #[error("insufficient octaves: need at least {needed}, have {available}")]
    InsufficientOctaves { needed: usize, available: usize },

    /// An octave requested by the caller is missing from a wavelet variance table.
    #[error("octave {0} is missing from the wavelet variance table")]
    MissingOctave(u32),

    /// The sample wavelet variance at an octave is zero or not finite.
    #[error("degenerate wavelet variance at octave {0}")]
    DegenerateVariance(u32),

    /// Only symlets with 1..=10 vanishing moments are tabulated.
    #[error("unsupported number of vanishing moments: {0} (supported: 1..=10)")]
    UnsupportedVanishingMoments(usize),

    /// The frequency mesh cannot resolve the equivalent filter.
    #[error("frequency mesh of {mesh} points is too coarse for a filter with {support} taps")]
    MeshTooCoarse { mesh: usize, support: usize },

    /// An iterative numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
