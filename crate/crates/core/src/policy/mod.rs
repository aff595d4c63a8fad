//! Gibbs quoting policy and the worst-case moment problem behind it.

mod domain;
mod grid;
mod integrand;
mod model;
mod solver;

pub use domain::{Quadrature, SpreadDomain, DEFAULT_GRID_N, MIN_GRID_N};
pub use grid::{
    build_policy, gibbs_policy, inner_objective, sample_policy, PolicyGrid, PolicySampler,
};
pub use model::{
    coefficients, expected_reward, log_m, Coefficients, FunctionSpec, Moments, SideMoments,
    SpreadModel,
};
pub use solver::{
    concavity_check, solve_inner, worst_case_objective, RobustSolution, SolverOptions,
    WorstCaseProblem,
};
