//! Seeded single-period market simulation.
//!
//! Each episode samples spreads from a policy, draws standardized arrivals
//! from the true meta-distributions, scales them with `h±(ε)·ξ + f±(ε)` and
//! books cash and the inventory penalty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::EmpiricalSummary;
use crate::policy::{PolicyGrid, PolicySampler, SolverOptions, SpreadModel, WorstCaseProblem};
use crate::stats::{lower_quantile_sorted, mean, std_err};

pub const MIN_EPISODES: usize = 1000;

/// Law of the standardized arrivals on one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetaDistribution {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// `x1` with probability `p`, otherwise `x2`.
    TwoPoint {
        x1: f64,
        x2: f64,
        p: f64,
    },
    /// Uniform resampling of observed values.
    Empirical {
        values: Vec<f64>,
    },
}

impl MetaDistribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !(sd >= 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidParameter(format!("gaussian({mean}, {sd})")));
        }
        Ok(Self::Gaussian { mean, sd })
    }

    pub fn two_point(x1: f64, x2: f64, p: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&p) && x1.is_finite() && x2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "two_point({x1}, {x2}, {p})"
            )));
        }
        Ok(Self::TwoPoint { x1, x2, p })
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSamples);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self::Empirical { values })
    }

    /// A point mass at `x`.
    pub fn point(x: f64) -> Result<Self> {
        Self::two_point(x, x, 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => {
                // sd is validated, so construction cannot fail.
                Normal::new(*mean, *sd)
                    .map(|d| d.sample(rng))
                    .unwrap_or(*mean)
            }
            Self::TwoPoint { x1, x2, p } => {
                if rng.random::<f64>() < *p {
                    *x1
                } else {
                    *x2
                }
            }
            Self::Empirical { values } => values[rng.random_range(0..values.len())],
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mean, .. } => *mean,
            Self::TwoPoint { x1, x2, p } => p * x1 + (1.0 - p) * x2,
            Self::Empirical { values } => mean(values),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => mean * mean + sd * sd,
            Self::TwoPoint { x1, x2, p } => p * x1 * x1 + (1.0 - p) * x2 * x2,
            Self::Empirical { values } => {
                let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
                mean(&sq)
            }
        }
    }

    /// Image under `x ↦ m + s·(x − m) + c` with `m` the current mean.
    pub fn shifted(&self, shift: &SideShift) -> Self {
        let m = self.mean();
        let map = |x: f64| m + shift.sd_scale * (x - m) + shift.mean_shift;
        match self {
            Self::Gaussian { mean, sd } => Self::Gaussian {
                mean: mean + shift.mean_shift,
                sd: sd * shift.sd_scale,
            },
            Self::TwoPoint { x1, x2, p } => Self::TwoPoint {
                x1: map(*x1),
                x2: map(*x2),
                p: *p,
            },
            Self::Empirical { values } => Self::Empirical {
                values: values.iter().map(|&x| map(x)).collect(),
            },
        }
    }
}

/// Affine perturbation of one side: the mean moves by `mean_shift` and the
/// spread about the mean is scaled by `sd_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SideShift {
    pub mean_shift: f64,
    pub sd_scale: f64,
}

impl SideShift {
    pub const NONE: SideShift = SideShift {
        mean_shift: 0.0,
        sd_scale: 1.0,
    };

    /// `W₂²` between a law with the given variance and its shifted image.
    pub fn w2_squared(&self, variance: f64) -> f64 {
        self.mean_shift * self.mean_shift + (self.sd_scale - 1.0).powi(2) * variance
    }
}

impl Default for SideShift {
    fn default() -> Self {
        Self::NONE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftSpec {
    pub plus: SideShift,
    pub minus: SideShift,
}

impl ShiftSpec {
    pub fn validate(&self) -> Result<()> {
        for s in [self.plus, self.minus] {
            if !(s.mean_shift.is_finite() && s.sd_scale >= 0.0 && s.sd_scale.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "shift requires finite mean_shift and sd_scale >= 0, got {s:?}"
                )));
            }
        }
        Ok(())
    }
}

/// One draw of order flow `(ΔN⁺, ΔN⁻)` at the given spreads.
pub fn draw_order_flow<R: Rng + ?Sized>(
    plus: &MetaDistribution,
    minus: &MetaDistribution,
    model: &SpreadModel,
    eps_plus: f64,
    eps_minus: f64,
    rng: &mut R,
) -> (f64, f64) {
    let xp = plus.sample(rng);
    let xm = minus.sample(rng);
    (
        model.h_plus.eval(eps_plus) * xp + model.f_plus.eval(eps_plus),
        model.h_minus.eval(eps_minus) * xm + model.f_minus.eval(eps_minus),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub cash_delta: f64,
    pub inventory_after: f64,
    /// `η·inventory_after²`.
    pub penalty: f64,
    /// `cash_delta − penalty`.
    pub realized_objective: f64,
    pub spreads_used: (f64, f64),
    pub fills: (f64, f64),
}

pub fn run_episode<R: Rng + ?Sized>(
    policy: &PolicySampler,
    model: &SpreadModel,
    plus: &MetaDistribution,
    minus: &MetaDistribution,
    rng: &mut R,
) -> EpisodeResult {
    let (ep, em) = policy.sample(rng);
    let (dp, dm) = draw_order_flow(plus, minus, model, ep, em, rng);
    let cash_delta = (model.s + ep) * dp - (model.s - em) * dm;
    let inventory_after = model.q + dp - dm;
    let penalty = model.eta * inventory_after * inventory_after;
    EpisodeResult {
        cash_delta,
        inventory_after,
        penalty,
        realized_objective: cash_delta - penalty,
        spreads_used: (ep, em),
        fills: (dp, dm),
    }
}

/// Generator for episode `k`: stream `k` of the master seed.
pub fn episode_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub episodes: usize,
    pub mean_objective: f64,
    pub std_err: f64,
    /// Lower 10% empirical quantile of the realized objective.
    pub p10_objective: f64,
}

fn summarize(mut values: Vec<f64>) -> MonteCarloSummary {
    let m = mean(&values);
    let se = std_err(&values, m);
    values.sort_by(f64::total_cmp);
    MonteCarloSummary {
        episodes: values.len(),
        mean_objective: m,
        std_err: se,
        p10_objective: lower_quantile_sorted(&values, 0.1),
    }
}

/// Runs `episodes` independent episodes of one policy.
pub fn simulate_policy(
    policy: &PolicyGrid,
    model: &SpreadModel,
    plus: &MetaDistribution,
    minus: &MetaDistribution,
    episodes: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if episodes < 2 {
        return Err(Error::InvalidParameter(
            "at least 2 episodes required".into(),
        ));
    }
    let sampler = PolicySampler::new(policy)?;
    let values = (0..episodes)
        .map(|k| {
            run_episode(&sampler, model, plus, minus, &mut episode_rng(seed, k)).realized_objective
        })
        .collect();
    Ok(summarize(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub delta: f64,
    pub mean_objective: f64,
    pub std_err: f64,
    pub p10_objective: f64,
    pub concave_certificate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub seed: u64,
    pub episodes: usize,
    pub shift: ShiftSpec,
    pub rows: Vec<ShiftRow>,
}

impl ShiftReport {
    /// CSV with header `delta,mean_objective,std_err,p10_objective,concave_certificate`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("delta,mean_objective,std_err,p10_objective,concave_certificate\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{}\n",
                r.delta, r.mean_objective, r.std_err, r.p10_objective, r.concave_certificate
            ));
        }
        out
    }
}

/// Solves the robust policy for every radius on the empirical samples and
/// evaluates each against the shifted empirical laws.
///
/// Episode `k` uses the same random stream for every radius, so differences
/// between rows reflect the policies rather than sampling noise.
#[allow(clippy::too_many_arguments)]
pub fn shift_experiment(
    samples_plus: &[f64],
    samples_minus: &[f64],
    model: &SpreadModel,
    domain: &crate::policy::SpreadDomain,
    deltas: &[f64],
    shift: &ShiftSpec,
    episodes: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<ShiftReport> {
    if episodes < MIN_EPISODES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_EPISODES} episodes required, got {episodes}"
        )));
    }
    if let Some(&d) = deltas.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::NegativeRadius(d));
    }
    shift.validate()?;
    let plus = EmpiricalSummary::from_values(samples_plus)?;
    let minus = EmpiricalSummary::from_values(samples_minus)?;
    let true_plus = MetaDistribution::empirical(samples_plus.to_vec())?.shifted(&shift.plus);
    let true_minus = MetaDistribution::empirical(samples_minus.to_vec())?.shifted(&shift.minus);
    let base = WorstCaseProblem::new(model, domain, &plus, &minus, 0.0)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let problem = base.with_delta(delta)?;
        let solution = problem.solve(opts)?;
        let policy = problem.policy(&solution)?;
        let s = simulate_policy(&policy, model, &true_plus, &true_minus, episodes, seed)?;
        rows.push(ShiftRow {
            delta,
            mean_objective: s.mean_objective,
            std_err: s.std_err,
            p10_objective: s.p10_objective,
            concave_certificate: solution.concave_certificate,
        });
    }
    Ok(ShiftReport {
        seed,
        episodes,
        shift: *shift,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{gibbs_policy, FunctionSpec, Moments, Quadrature, SpreadDomain};

    fn model() -> SpreadModel {
        SpreadModel {
            s: 10.0,
            q: 0.5,
            eta: 0.2,
            gamma: 0.5,
            f_plus: FunctionSpec::exp_decay(1.0, 1.0),
            f_minus: FunctionSpec::exp_decay(1.0, 1.0),
            h_plus: FunctionSpec::exp_decay(0.5, 0.5),
            h_minus: FunctionSpec::exp_decay(0.5, 0.5),
        }
    }

    fn flat(q: f64) -> SpreadModel {
        SpreadModel {
            q,
            eta: 1.0,
            f_plus: FunctionSpec::ZERO,
            f_minus: FunctionSpec::ZERO,
            h_plus: FunctionSpec::ZERO,
            h_minus: FunctionSpec::ZERO,
            ..model()
        }
    }

    fn uniform_sampler(m: &SpreadModel) -> PolicySampler {
        let d = SpreadDomain::new(1.0, 17, Quadrature::Trapezoid).unwrap();
        let g = gibbs_policy(m, &d, &Moments::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        PolicySampler::new(&g).unwrap()
    }

    #[test]
    fn zero_scale_gives_mean_flow() {
        let m = SpreadModel {
            h_plus: FunctionSpec::ZERO,
            h_minus: FunctionSpec::ZERO,
            ..model()
        };
        let g = MetaDistribution::gaussian(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (dp, dm) = draw_order_flow(&g, &g, &m, 0.3, 0.7, &mut rng);
        assert_eq!(dp, m.f_plus.eval(0.3));
        assert_eq!(dm, m.f_minus.eval(0.7));
        let z = MetaDistribution::point(0.0).unwrap();
        let (dp, dm) = draw_order_flow(&z, &z, &model(), 0.3, 0.7, &mut rng);
        assert_eq!(
            (dp, dm),
            (model().f_plus.eval(0.3), model().f_minus.eval(0.7))
        );
    }

    #[test]
    fn flat_market_episodes() {
        let g = MetaDistribution::gaussian(0.0, 1.0).unwrap();
        let m0 = flat(0.0);
        let s = uniform_sampler(&m0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = run_episode(&s, &m0, &g, &g, &mut rng);
        assert_eq!(
            (r.cash_delta, r.penalty, r.realized_objective),
            (0.0, 0.0, 0.0)
        );
        let m2 = flat(2.0);
        for _ in 0..10 {
            assert_eq!(
                run_episode(&s, &m2, &g, &g, &mut rng).realized_objective,
                -4.0
            );
        }
    }

    #[test]
    fn accounting_identity() {
        let g = MetaDistribution::gaussian(0.3, 1.2).unwrap();
        let s = uniform_sampler(&model());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let r = run_episode(&s, &model(), &g, &g, &mut rng);
            assert_eq!(r.inventory_after, model().q + r.fills.0 - r.fills.1);
            assert_eq!(
                r.realized_objective,
                r.cash_delta - model().eta * r.inventory_after * r.inventory_after
            );
        }
    }

    #[test]
    fn shifts_move_moments() {
        let e = MetaDistribution::empirical(vec![-1.0, 0.0, 1.0, 2.0]).unwrap();
        let s = SideShift {
            mean_shift: 0.5,
            sd_scale: 2.0,
        };
        let t = e.shifted(&s);
        let var = |d: &MetaDistribution| d.second_moment() - d.mean().powi(2);
        assert!((t.mean() - e.mean() - 0.5).abs() < 1e-15);
        assert!((var(&t) - 4.0 * var(&e)).abs() < 1e-12);
        let tp = MetaDistribution::two_point(0.0, 2.0, 0.25)
            .unwrap()
            .shifted(&SideShift::NONE);
        assert_eq!(tp, MetaDistribution::two_point(0.0, 2.0, 0.25).unwrap());
        assert!(MetaDistribution::two_point(0.0, 1.0, 1.5).is_err());
        assert!(MetaDistribution::gaussian(0.0, -1.0).is_err());
    }

    #[test]
    fn experiment_validates_inputs() {
        let d = SpreadDomain::new(1.0, 17, Quadrature::Trapezoid).unwrap();
        let x = [0.1, -0.4, 0.8, 0.3];
        let o = SolverOptions::default();
        let spec = ShiftSpec::default();
        assert!(shift_experiment(&x, &x, &model(), &d, &[0.0], &spec, 999, 1, &o).is_err());
        assert!(matches!(
            shift_experiment(&x, &x, &model(), &d, &[-0.1], &spec, 1000, 1, &o),
            Err(Error::NegativeRadius(_))
        ));
    }

    #[test]
    fn experiment_is_seeded_and_flags_certificate() {
        let d = SpreadDomain::new(1.0, 17, Quadrature::Trapezoid).unwrap();
        let xp = [0.1, -0.4, 0.8, 0.3];
        let xm = [0.5, -0.2, 0.4, 1.0];
        let o = SolverOptions::default();
        let spec = ShiftSpec {
            plus: SideShift {
                mean_shift: 0.1,
                sd_scale: 1.0,
            },
            minus: SideShift::NONE,
        };
        let run = || {
            shift_experiment(
                &xp,
                &xm,
                &model(),
                &d,
                &[0.0, 0.01, 1.0],
                &spec,
                1000,
                5,
                &o,
            )
            .unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.rows[0].concave_certificate && a.rows[1].concave_certificate);
        assert!(!a.rows[2].concave_certificate);
        assert!(a
            .to_csv()
            .starts_with("delta,mean_objective,std_err,p10_objective,concave_certificate\n"));
    }
}
