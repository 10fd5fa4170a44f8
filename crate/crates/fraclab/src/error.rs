use thiserror::Error;

#[derive(Debug, Error)]
pub enum FracError {
    /// The reciprocal-absorption integral 1/g fails to converge at infinity.
    #[error("non-integrable tail: integral of 1/g does not converge ({0})")]
    NonIntegrableTail(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("grid too coarse: diffusion length {length:.3e} below 2x spacing {spacing:.3e}")]
    GridTooCoarse { length: f64, spacing: f64 },

    #[error("far-field decay of the integrand is unknown and its tail is significant")]
    DecayUnknown,

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    /// A field value exceeded 10x the flat maximal solution; the scheme is unstable.
    #[error("blow-up guard tripped at t={t:.3e}: max u = {max:.3e} > 10 U(t) = {bound:.3e}")]
    BlowupGuard { t: f64, max: f64, bound: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("search failed: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, FracError>;
