use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical routines distinguish three broad failure classes: bad inputs
/// (`Domain`, `Config`), honest non-convergence with the best estimate
/// attached (`QuadratureNoConverge`, `BasisNotConverged`), and structural
/// problems such as a spectrum that is too short for the requested occupation
/// tail (`SpectrumTooShort`).
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions. Carries the best
    /// estimate and the error bound it could certify.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} after {subdivisions} subdivisions")]
    QuadratureNoConverge {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// Root bracketing or iteration failed.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// The provided spectrum ends too early for the requested occupation
    /// or convolution tail to be negligible.
    #[error("spectrum too short: {0}")]
    SpectrumTooShort(String),

    /// Variational basis cannot certify the requested levels.
    #[error("basis not converged: {0}")]
    BasisNotConverged(String),

    /// Requested particle number cannot be realised by the scheme
    /// (e.g. odd N, or zero-temperature filling inside a degenerate shell).
    #[error("particle number not realisable: {0}")]
    ParticleNumber(String),

    /// Orbit or periodic-orbit catalog record is missing a field required
    /// by the requested target (e.g. the kinetic weight Q for tau1).
    #[error("catalog record incomplete: {0}")]
    CatalogIncomplete(String),

    /// Operation not defined for this potential model.
    #[error("not supported for this model: {0}")]
    Unsupported(String),

    /// Config file parsing or validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
