//! The two-dimensional worst-case moment problem.
//!
//! With the second moments pinned to the envelope, the adversary's choice
//! reduces to the pair of means `(α⁺, α⁻)` in a box. The market maker's
//! worst-case value is `−γ∬M`; maximizing it is the same as minimizing
//! `log ∬M`, which is what the solver works with internally since it is
//! convex whenever [`concavity_check`] holds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{EmpiricalSummary, MomentBox};

use super::domain::SpreadDomain;
use super::integrand::IntegrandTable;
use super::model::{Moments, SpreadModel};

/// `var⁺·var⁻ ≥ δ²`: a sufficient condition for the worst-case objective to
/// be concave over the whole box.
pub fn concavity_check(plus: &EmpiricalSummary, minus: &EmpiricalSummary, delta: f64) -> bool {
    plus.variance * minus.variance >= delta * delta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stopping tolerance on the relative change of the objective.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Finite-difference step, as a multiple of `√δ`.
    pub fd_step: f64,
    /// Inward shrink of the box, as a multiple of `√δ`.
    pub margin: f64,
    /// Points per axis of the fallback grid search.
    pub fallback_grid: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 500,
            fd_step: 1e-6,
            margin: 1e-9,
            fallback_grid: 201,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.tolerance > 0.0) {
            return bad("solver tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("solver max_iterations must be positive");
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.1) {
            return bad("solver fd_step must lie in (0, 0.1)");
        }
        if !(self.margin >= 0.0 && self.margin < self.fd_step) {
            return bad("solver margin must lie in [0, fd_step)");
        }
        if self.fallback_grid < 3 {
            return bad("solver fallback_grid must be at least 3");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub alpha_star_plus: f64,
    pub alpha_star_minus: f64,
    pub beta_star_plus: f64,
    pub beta_star_minus: f64,
    /// `−γ∬M` at the solution.
    pub objective: f64,
    pub concave_certificate: bool,
    pub iterations: usize,
    pub delta: f64,
}

impl RobustSolution {
    pub fn moments(&self) -> Moments {
        Moments::new(
            self.alpha_star_plus,
            self.alpha_star_minus,
            self.beta_star_plus,
            self.beta_star_minus,
        )
    }
}

/// Worst-case objective over the moment box for one model, domain and pair
/// of empirical summaries. The integrand table is shared between clones, so
/// re-solving at another radius is cheap.
#[derive(Debug, Clone)]
pub struct WorstCaseProblem {
    model: SpreadModel,
    domain: SpreadDomain,
    table: Arc<IntegrandTable>,
    plus: MomentBox,
    minus: MomentBox,
}

impl WorstCaseProblem {
    pub fn new(
        model: &SpreadModel,
        domain: &SpreadDomain,
        plus: &EmpiricalSummary,
        minus: &EmpiricalSummary,
        delta: f64,
    ) -> Result<Self> {
        Ok(Self {
            model: *model,
            domain: *domain,
            table: Arc::new(IntegrandTable::new(model, domain)?),
            plus: MomentBox::new(*plus, delta)?,
            minus: MomentBox::new(*minus, delta)?,
        })
    }

    /// The same problem at another radius.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Ok(Self {
            plus: MomentBox::new(self.plus.summary, delta)?,
            minus: MomentBox::new(self.minus.summary, delta)?,
            ..self.clone()
        })
    }

    pub fn model(&self) -> &SpreadModel {
        &self.model
    }

    pub fn domain(&self) -> &SpreadDomain {
        &self.domain
    }

    pub fn delta(&self) -> f64 {
        self.plus.delta
    }

    pub fn plus(&self) -> &MomentBox {
        &self.plus
    }

    pub fn minus(&self) -> &MomentBox {
        &self.minus
    }

    pub fn concave_certificate(&self) -> bool {
        concavity_check(&self.plus.summary, &self.minus.summary, self.delta())
    }

    /// Moments with the second moments on the envelope.
    pub fn moments_at(&self, alpha_plus: f64, alpha_minus: f64) -> Result<Moments> {
        Ok(Moments::new(
            alpha_plus,
            alpha_minus,
            self.plus.envelope(alpha_plus)?,
            self.minus.envelope(alpha_minus)?,
        ))
    }

    /// `log ∬M` over the domain.
    pub fn log_mass(&self, alpha_plus: f64, alpha_minus: f64) -> Result<f64> {
        self.table
            .log_mass(&self.moments_at(alpha_plus, alpha_minus)?)
    }

    /// `−γ∬M`.
    pub fn objective(&self, alpha_plus: f64, alpha_minus: f64) -> Result<f64> {
        let lz = self.log_mass(alpha_plus, alpha_minus)?;
        finite_objective(self.model.gamma, lz)
    }

    /// `γ·log ∬M`: the entropy-regularized expected reward attained by the
    /// Gibbs policy against these moments.
    pub fn regularized_value(&self, alpha_plus: f64, alpha_minus: f64) -> Result<f64> {
        Ok(self.model.gamma * self.log_mass(alpha_plus, alpha_minus)?)
    }

    /// Relative quadrature error estimate `|Z_h − Z_2h| / (3 Z_h)` from the
    /// nested trapezoid grid; `None` when the grid does not nest.
    pub fn quadrature_error(&self, alpha_plus: f64, alpha_minus: f64) -> Option<Result<f64>> {
        let m = match self.moments_at(alpha_plus, alpha_minus) {
            Ok(m) => m,
            Err(e) => return Some(Err(e)),
        };
        let coarse = self.table.log_mass_coarse(&m)?;
        Some(coarse.and_then(|lc| {
            let lf = self.table.log_mass(&m)?;
            Ok((lc - lf).exp_m1().abs() / 3.0)
        }))
    }

    pub(crate) fn table(&self) -> &IntegrandTable {
        &self.table
    }

    /// Maximizes the worst-case objective over the box.
    pub fn solve(&self, opts: &SolverOptions) -> Result<RobustSolution> {
        opts.validate()?;
        let delta = self.delta();
        let certificate = self.concave_certificate();
        let center = (self.plus.summary.alpha_n, self.minus.summary.alpha_n);
        if delta == 0.0 || self.table.is_moment_free() {
            return self.solution_at(center.0, center.1, 0, certificate);
        }
        let search = BoxSearch::new(self, opts);
        let (x, iterations) = if certificate {
            search.descend((0.0, 0.0))?
        } else {
            search.multi_start()?
        };
        let (ap, am) = search.to_alpha(x);
        self.solution_at(ap, am, iterations, certificate)
    }

    fn solution_at(
        &self,
        alpha_plus: f64,
        alpha_minus: f64,
        iterations: usize,
        certificate: bool,
    ) -> Result<RobustSolution> {
        let m = self.moments_at(alpha_plus, alpha_minus)?;
        let objective = finite_objective(self.model.gamma, self.table.log_mass(&m)?)?;
        Ok(RobustSolution {
            alpha_star_plus: alpha_plus,
            alpha_star_minus: alpha_minus,
            beta_star_plus: m.plus.beta,
            beta_star_minus: m.minus.beta,
            objective,
            concave_certificate: certificate,
            iterations,
            delta: self.delta(),
        })
    }
}

fn finite_objective(gamma: f64, log_mass: f64) -> Result<f64> {
    let v = -gamma * log_mass.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureNonFinite)
    }
}

pub fn worst_case_objective(
    model: &SpreadModel,
    domain: &SpreadDomain,
    plus: &EmpiricalSummary,
    minus: &EmpiricalSummary,
    delta: f64,
    alpha_plus: f64,
    alpha_minus: f64,
) -> Result<f64> {
    WorstCaseProblem::new(model, domain, plus, minus, delta)?.objective(alpha_plus, alpha_minus)
}

pub fn solve_inner(
    model: &SpreadModel,
    domain: &SpreadDomain,
    plus: &EmpiricalSummary,
    minus: &EmpiricalSummary,
    delta: f64,
    opts: &SolverOptions,
) -> Result<RobustSolution> {
    WorstCaseProblem::new(model, domain, plus, minus, delta)?.solve(opts)
}

type Point = (f64, f64);

/// Minimizes `log ∬M` in coordinates normalized to `[−1, 1]²`.
struct BoxSearch<'a> {
    problem: &'a WorstCaseProblem,
    opts: &'a SolverOptions,
    radius: f64,
    lim: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

impl<'a> BoxSearch<'a> {
    fn new(problem: &'a WorstCaseProblem, opts: &'a SolverOptions) -> Self {
        Self {
            problem,
            opts,
            radius: problem.delta().sqrt(),
            lim: 1.0 - opts.margin,
        }
    }

    fn to_alpha(&self, x: Point) -> Point {
        (
            self.problem.plus.summary.alpha_n + self.radius * x.0,
            self.problem.minus.summary.alpha_n + self.radius * x.1,
        )
    }

    fn project(&self, x: Point) -> Point {
        (
            x.0.clamp(-self.lim, self.lim),
            x.1.clamp(-self.lim, self.lim),
        )
    }

    fn eval(&self, x: Point) -> Result<f64> {
        let (ap, am) = self.to_alpha(x);
        self.problem.log_mass(ap, am)
    }

    fn gradient(&self, x: Point, fx: f64) -> Result<Point> {
        let h = self.opts.fd_step;
        let partial = |v: f64, at: &dyn Fn(f64) -> Point| -> Result<f64> {
            if v + h <= self.lim && v - h >= -self.lim {
                Ok((self.eval(at(v + h))? - self.eval(at(v - h))?) / (2.0 * h))
            } else if v + h <= self.lim {
                Ok((self.eval(at(v + h))? - fx) / h)
            } else {
                Ok((fx - self.eval(at(v - h))?) / h)
            }
        };
        Ok((partial(x.0, &|v| (v, x.1))?, partial(x.1, &|v| (x.0, v))?))
    }

    /// Projected gradient descent with Barzilai–Borwein steps and Armijo
    /// backtracking. Returns the minimizer and the iteration count.
    fn descend(&self, start: Point) -> Result<(Point, usize)> {
        let tol = self.opts.tolerance;
        let mut x = self.project(start);
        let mut fx = self.eval(x)?;
        let mut g = self.gradient(x, fx)?;
        let gnorm = g.0.hypot(g.1);
        let mut step = if gnorm > 0.0 { 0.25 / gnorm } else { 1.0 };
        for iter in 1..=self.opts.max_iterations {
            let mut t = step;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACK {
                let xn = self.project((x.0 - t * g.0, x.1 - t * g.1));
                let s = (xn.0 - x.0, xn.1 - x.1);
                if s == (0.0, 0.0) {
                    break;
                }
                let fxn = self.eval(xn)?;
                if fxn <= fx + ARMIJO * (g.0 * s.0 + g.1 * s.1) {
                    accepted = Some((xn, fxn));
                    break;
                }
                t *= 0.5;
            }
            let Some((xn, fxn)) = accepted else {
                return match self.compass(x, fx)? {
                    None => Ok((x, iter)),
                    Some(_) => self.grid_fallback().map(|p| (p, iter)),
                };
            };
            let gn = self.gradient(xn, fxn)?;
            let s = (xn.0 - x.0, xn.1 - x.1);
            let y = (gn.0 - g.0, gn.1 - g.1);
            let sy = s.0 * y.0 + s.1 * y.1;
            let ss = s.0 * s.0 + s.1 * s.1;
            step = if sy > 0.0 { ss / sy } else { 2.0 * t };
            let decrease = fx - fxn;
            x = xn;
            fx = fxn;
            g = gn;
            if decrease <= tol && ss.sqrt() <= 1e-6 || decrease <= 1e-3 * tol {
                return Ok((x, iter));
            }
        }
        let (ap, am) = self.to_alpha(x);
        Err(Error::NonConvergence {
            iterations: self.opts.max_iterations,
            alpha_plus: ap,
            alpha_minus: am,
            objective: finite_objective(self.problem.model.gamma, fx).unwrap_or(f64::NAN),
        })
    }

    /// Looks for a strictly better point among the four axis neighbours at
    /// a small radius; `None` confirms `x` as a local minimizer.
    fn compass(&self, x: Point, fx: f64) -> Result<Option<Point>> {
        let r = 10.0 * self.opts.fd_step;
        for d in [(r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r)] {
            let y = self.project((x.0 + d.0, x.1 + d.1));
            if y != x && self.eval(y)? < fx - self.opts.tolerance {
                return Ok(Some(y));
            }
        }
        Ok(None)
    }

    /// Exhaustive search on the closed box followed by compass refinement.
    fn grid_fallback(&self) -> Result<Point> {
        let k = self.opts.fallback_grid;
        let at = |i: usize| -1.0 + 2.0 * i as f64 / (k - 1) as f64;
        let mut best = ((0.0, 0.0), self.eval((0.0, 0.0))?);
        for i in 0..k {
            for j in 0..k {
                let x = self.project((at(i), at(j)));
                let f = self.eval(x)?;
                if f < best.1 {
                    best = (x, f);
                }
            }
        }
        let (mut x, mut fx) = best;
        let mut r = 2.0 / (k - 1) as f64;
        while r > 1e-10 {
            let mut moved = false;
            for d in [(r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r)] {
                let y = self.project((x.0 + d.0, x.1 + d.1));
                let fy = self.eval(y)?;
                if fy < fx {
                    x = y;
                    fx = fy;
                    moved = true;
                }
            }
            if !moved {
                r *= 0.5;
            }
        }
        Ok(x)
    }

    /// Descends from the nine points of a 3×3 lattice; the centre is kept
    /// unless another start is strictly better.
    fn multi_start(&self) -> Result<(Point, usize)> {
        let (mut best, mut iterations) = self.descend((0.0, 0.0))?;
        let mut best_f = self.eval(best)?;
        for a in [-0.5, 0.0, 0.5] {
            for b in [-0.5, 0.0, 0.5] {
                if (a, b) == (0.0, 0.0) {
                    continue;
                }
                let (x, it) = self.descend((a, b))?;
                iterations += it;
                let f = self.eval(x)?;
                if f < best_f {
                    best = x;
                    best_f = f;
                }
            }
        }
        Ok((best, iterations))
    }
}
