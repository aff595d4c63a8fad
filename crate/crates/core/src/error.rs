use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no samples")]
    NoSamples,

    #[error("non-finite sample value at index {index}")]
    NonFiniteSample { index: usize },

    #[error("sample parse error on line {line}: {message}")]
    SampleParse { line: usize, message: String },

    #[error("negative radius: delta = {0}")]
    NegativeRadius(f64),

    #[error("alpha infeasible: {alpha} outside [{lo}, {hi}]")]
    AlphaInfeasible { alpha: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrand overflow at (eps_plus = {eps_plus}, eps_minus = {eps_minus})")]
    IntegrandOverflow { eps_plus: f64, eps_minus: f64 },

    #[error("quadrature produced a non-finite value")]
    QuadratureNonFinite,

    #[error(
        "solver did not converge after {iterations} iterations; best iterate \
         alpha = ({alpha_plus}, {alpha_minus}) with objective {objective}"
    )]
    NonConvergence {
        iterations: usize,
        alpha_plus: f64,
        alpha_minus: f64,
        objective: f64,
    },

    #[error("degenerate policy: {0}")]
    DegeneratePolicy(String),

    #[error("degenerate empirical covariance")]
    DegenerateCovariance,

    #[error("gram bound violated: alpha_n^T Sigma_n^-1 alpha_n = {0} >= 1")]
    GramBoundViolated(f64),

    #[error("invalid chi {0}: must lie in (0, 1)")]
    InvalidChi(f64),

    #[error("no feasible measure")]
    NoFeasibleMeasure,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
}
