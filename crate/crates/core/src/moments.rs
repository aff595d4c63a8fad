//! Empirical moments of standardized order flow and the first/second moment
//! ranges reachable inside a W₂ ball around the empirical measure.
//!
//! `delta` is the squared budget of the ball: a measure `Q` is admissible when
//! `W₂(Q, Q̂ₙ)² ≤ delta`. Under that convention the mean ranges over
//! `αₙ ± √δ` and, for a fixed mean `α`, the second moment is bounded above by
//!
//! ```text
//! u(α) = βₙ + 2(α − αₙ)αₙ + δ + 2·√(βₙ − αₙ²)·√(δ − (α − αₙ)²)
//! ```
//!
//! which equals `(√Var + √(δ − (α − αₙ)²))² + α²`, the form the robust policy
//! consumes.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack tolerated on `δ − (α − αₙ)²` before `α` is declared infeasible.
const BOUNDARY_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Market buy orders, filled at the ask (`+`).
    Buy,
    /// Market sell orders, filled at the bid (`−`).
    Sell,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Buy => f.write_str("buy"),
            Side::Sell => f.write_str("sell"),
        }
    }
}

/// Standardized arrivals observed for one side of the book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    side: Side,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(side: Side, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSamples);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { side, values })
    }

    /// Parses a single-column CSV body. An optional first line `value` is
    /// treated as a header; blank lines are skipped. Numbers use `.` as the
    /// decimal separator regardless of locale.
    pub fn from_csv_str(side: Side, body: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if values.is_empty() && i == 0 && line.eq_ignore_ascii_case("value") {
                continue;
            }
            let v: f64 = line.parse().map_err(|e| Error::SampleParse {
                line: i + 1,
                message: format!("{line:?}: {e}"),
            })?;
            values.push(v);
        }
        Self::new(side, values)
    }

    pub fn read_csv(side: Side, path: impl AsRef<Path>) -> std::io::Result<Result<Self>> {
        let body = std::fs::read_to_string(path)?;
        Ok(Self::from_csv_str(side, &body))
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn summary(&self) -> EmpiricalSummary {
        EmpiricalSummary::from_values(&self.values).expect("SampleSet is non-empty by construction")
    }
}

/// First and second empirical moments of one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub alpha_n: f64,
    pub beta_n: f64,
    pub variance: f64,
    pub n: usize,
}

impl EmpiricalSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSamples);
        }
        let n = values.len();
        let alpha_n = values.iter().sum::<f64>() / n as f64;
        let beta_n = values.iter().map(|v| v * v).sum::<f64>() / n as f64;
        // Rounding can push βₙ − αₙ² a hair below zero for constant samples.
        let variance = (beta_n - alpha_n * alpha_n).max(0.0);
        Ok(Self {
            alpha_n,
            beta_n,
            variance,
            n,
        })
    }

    /// Builds a summary from moments directly (no sample set behind it).
    pub fn from_moments(alpha_n: f64, beta_n: f64, n: usize) -> Result<Self> {
        if !alpha_n.is_finite() || !beta_n.is_finite() {
            return Err(Error::InvalidParameter("non-finite moments".into()));
        }
        if beta_n < alpha_n * alpha_n - 1e-12 * (1.0 + beta_n.abs()) {
            return Err(Error::InvalidParameter(format!(
                "second moment {beta_n} below squared mean {}",
                alpha_n * alpha_n
            )));
        }
        Ok(Self {
            alpha_n,
            beta_n,
            variance: (beta_n - alpha_n * alpha_n).max(0.0),
            n,
        })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn empirical_moments(samples: &SampleSet) -> Result<EmpiricalSummary> {
    EmpiricalSummary::from_values(samples.values())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::NegativeRadius(delta));
    }
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta = {delta}")));
    }
    Ok(())
}

/// Range of means attainable in the ball: `[αₙ − √δ, αₙ + √δ]`.
pub fn alpha_range(summary: &EmpiricalSummary, delta: f64) -> Result<Interval> {
    check_delta(delta)?;
    let r = delta.sqrt();
    Ok(Interval {
        lo: summary.alpha_n - r,
        hi: summary.alpha_n + r,
    })
}

/// `√(δ − (α − αₙ)²)`, clamped to zero within the boundary slack.
fn residual_radius(summary: &EmpiricalSummary, delta: f64, alpha: f64) -> Result<f64> {
    check_delta(delta)?;
    let d = alpha - summary.alpha_n;
    let slack = delta - d * d;
    if slack < -BOUNDARY_SLACK * (1.0 + delta) || !alpha.is_finite() {
        let range = alpha_range(summary, delta)?;
        return Err(Error::AlphaInfeasible {
            alpha,
            lo: range.lo,
            hi: range.hi,
        });
    }
    Ok(slack.max(0.0).sqrt())
}

/// Second-moment bounds at a fixed mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    /// `max(ℓ(α), α²)`.
    pub lower: f64,
    /// `u(α)`.
    pub upper: f64,
    /// `ℓ(α)` exactly as the closed form gives it; may fall below `α²`.
    pub ell_raw: f64,
}

pub fn beta_bounds(summary: &EmpiricalSummary, delta: f64, alpha: f64) -> Result<BetaBounds> {
    let root = residual_radius(summary, delta, alpha)?;
    let sd = summary.std_dev();
    let shift = 2.0 * (alpha - summary.alpha_n) * summary.alpha_n + delta;
    let upper = summary.beta_n + shift + 2.0 * sd * root;
    let ell_raw = shift - 2.0 * sd * root;
    Ok(BetaBounds {
        lower: ell_raw.max(alpha * alpha),
        upper,
        ell_raw,
    })
}

/// Worst-case second moment pinned to the mean:
/// `(√(βₙ − αₙ²) + √(δ − (α − αₙ)²))² + α²`.
///
/// At `delta == 0` the ball holds only the empirical measure and `βₙ` is
/// returned as stored.
pub fn theorem_beta_envelope(summary: &EmpiricalSummary, delta: f64, alpha: f64) -> Result<f64> {
    let root = residual_radius(summary, delta, alpha)?;
    if delta == 0.0 {
        return Ok(summary.beta_n);
    }
    let s = summary.std_dev() + root;
    Ok(s * s + alpha * alpha)
}

/// The feasible (α, β) region of one marginal ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBox {
    pub summary: EmpiricalSummary,
    pub delta: f64,
}

impl MomentBox {
    pub fn new(summary: EmpiricalSummary, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { summary, delta })
    }

    pub fn alpha_lo(&self) -> f64 {
        self.summary.alpha_n - self.delta.sqrt()
    }

    pub fn alpha_hi(&self) -> f64 {
        self.summary.alpha_n + self.delta.sqrt()
    }

    pub fn alpha_range(&self) -> Interval {
        Interval {
            lo: self.alpha_lo(),
            hi: self.alpha_hi(),
        }
    }

    pub fn beta_upper(&self, alpha: f64) -> Result<f64> {
        beta_bounds(&self.summary, self.delta, alpha).map(|b| b.upper)
    }

    pub fn beta_lower(&self, alpha: f64) -> Result<f64> {
        beta_bounds(&self.summary, self.delta, alpha).map(|b| b.lower)
    }

    pub fn envelope(&self, alpha: f64) -> Result<f64> {
        theorem_beta_envelope(&self.summary, self.delta, alpha)
    }
}
