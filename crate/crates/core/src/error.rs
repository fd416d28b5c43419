use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("radius {0} is neither a radial node nor the unit circle")]
    RadiusNotOnGrid(f64),

    #[error("exponent p = {0} outside (1, inf)")]
    InvalidExponent(f64),

    #[error("expected real-valued boundary data")]
    NotReal,

    #[error("input field is not holomorphic (negative-mode mass {0:.3e})")]
    NotHolomorphic(f64),

    #[error("field has no exact boundary values; it was not produced by a Cauchy-type operator")]
    NoExactTrace,

    #[error("trace extrapolation diverged (growth ratio {0:.3e})")]
    ExtrapolationDiverged(f64),

    #[error("dense oracle refused: grid {n_theta}x{n_r} exceeds 64x24")]
    OracleTooLarge { n_theta: usize, n_r: usize },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("alpha is not derived from a coefficient nu")]
    AlphaNotFromCoefficient,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("{stage} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        stage: String,
        iterations: usize,
        residual: f64,
    },

    #[error("Neumann compatibility violated: |int sigma*g dtheta| / (2 pi) = {0:.3e}")]
    Compatibility(f64),

    #[error("invalid conformal map: {0}")]
    InvalidMap(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("density experiment: {0}")]
    Density(String),
}
