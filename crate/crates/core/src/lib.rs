//! Wasserstein-robust market making with entropy-regularized quoting.
//!
//! The crate is organised around the pipeline a desk would run:
//!
//! - [`moments`]: empirical moments of standardized order flow and the
//!   moment ranges reachable inside a W₂ ball around the empirical measure.
//! - [`policy`]: the Gibbs quoting density, the two-dimensional worst-case
//!   moment problem and policy sampling.
//! - [`profile`]: the closed-form robust profile and bootstrap selection of
//!   the ambiguity radius.
//! - [`oracle`]: exact 1-D optimal transport and brute-force moment searches
//!   used to validate the analytic bounds.
//! - [`simulator`]: a seeded Monte Carlo market for evaluating policies under
//!   distribution shift.
//!
//! Throughout, `delta` passed to [`moments`] and [`policy`] is the squared
//! W₂ budget of each marginal ball (`W₂² ≤ delta`).

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod moments;
pub mod oracle;
pub mod policy;
pub mod profile;
pub mod simulator;
mod stats;

pub use error::{Error, Result};
pub use moments::{
    alpha_range, beta_bounds, empirical_moments, theorem_beta_envelope, BetaBounds,
    EmpiricalSummary, Interval, MomentBox, SampleSet, Side,
};
pub use oracle::{
    min_w2_squared_given_moments, moment_range_search, product_w2_squared, w2_distance, w2_squared,
    DiscreteMeasure, SearchObjective, SupportSpec,
};
pub use policy::{
    build_policy, coefficients, concavity_check, expected_reward, gibbs_policy, inner_objective,
    log_m, sample_policy, solve_inner, worst_case_objective, Coefficients, FunctionSpec, Moments,
    PolicyGrid, PolicySampler, Quadrature, RobustSolution, SideMoments, SolverOptions,
    SpreadDomain, SpreadModel, WorstCaseProblem,
};
pub use profile::{gram_bound_check, robust_profile, select_radius, MomentTarget, RadiusSelection};
pub use simulator::{
    draw_order_flow, episode_rng, run_episode, shift_experiment, simulate_policy, EpisodeResult,
    MetaDistribution, MonteCarloSummary, ShiftReport, ShiftRow, ShiftSpec, SideShift,
};
