//! Closed-form robust profile of the moment pair `(α, Σ)` and bootstrap
//! selection of the ambiguity radius.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::EmpiricalSummary;
use crate::stats::lower_quantile_sorted;

/// Relative slack allowed when checking `β ≥ α²`.
const MOMENT_SLACK: f64 = 1e-12;
/// Relative determinant threshold below which `Σₙ` is treated as singular.
const SINGULAR_RTOL: f64 = 1e-12;
pub const MIN_RESAMPLES: usize = 100;

/// Means `α = (α⁺, α⁻)` and the second-moment matrix
/// `Σ = [[β⁺, α⁺α⁻], [α⁺α⁻, β⁻]]` of independent arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTarget {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl MomentTarget {
    pub fn new(alpha_plus: f64, alpha_minus: f64, beta_plus: f64, beta_minus: f64) -> Result<Self> {
        for (a, b) in [(alpha_plus, beta_plus), (alpha_minus, beta_minus)] {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter(
                    "moment target must be finite".into(),
                ));
            }
            if b < a * a - MOMENT_SLACK * (1.0 + a * a) {
                return Err(Error::InvalidParameter(format!(
                    "second moment {b} below squared mean {}",
                    a * a
                )));
            }
        }
        Ok(Self {
            alpha: [alpha_plus, alpha_minus],
            beta: [beta_plus, beta_minus],
        })
    }

    pub fn from_summaries(plus: &EmpiricalSummary, minus: &EmpiricalSummary) -> Self {
        Self {
            alpha: [plus.alpha_n, minus.alpha_n],
            beta: [plus.beta_n, minus.beta_n],
        }
    }

    pub fn alpha_vec(&self) -> Vector2<f64> {
        Vector2::new(self.alpha[0], self.alpha[1])
    }

    pub fn sigma(&self) -> Matrix2<f64> {
        let off = self.alpha[0] * self.alpha[1];
        Matrix2::new(self.beta[0], off, off, self.beta[1])
    }
}

fn inverse_sigma(center: &MomentTarget) -> Result<Matrix2<f64>> {
    let s = center.sigma();
    let det = s.determinant();
    if !(det > SINGULAR_RTOL * center.beta[0] * center.beta[1]) || !det.is_finite() {
        return Err(Error::DegenerateCovariance);
    }
    Ok(Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]) / det)
}

/// `αₙᵀ Σₙ⁻¹ αₙ` for the empirical pair.
pub fn gram_bound_check(plus: &EmpiricalSummary, minus: &EmpiricalSummary) -> Result<f64> {
    let center = MomentTarget::from_summaries(plus, minus);
    let inv = inverse_sigma(&center)?;
    let a = center.alpha_vec();
    Ok(a.dot(&(inv * a)))
}

/// Robust profile of `target` relative to the empirical summaries with `n`
/// samples per side.
///
/// With `d = α − αₙ`, `D = Σₙ − Σ`, `g = αₙᵀΣₙ⁻¹αₙ` the value is
///
/// ```text
/// dᵀd / (4n(1−g)) + αₙᵀΣₙ⁻¹D²Σₙ⁻¹αₙ / (4n(1−g)) + αₙᵀΣₙ⁻¹D d / (2n(1−g))
///   + Tr(DΣₙ⁻¹D) / (2n) + E[uᵀΣₙ⁻¹D²Σₙ⁻¹u] / (4n)
/// ```
///
/// where the expectation runs over the empirical product measure, whose
/// second-moment matrix is `Σₙ`.
pub fn robust_profile(
    target: &MomentTarget,
    plus: &EmpiricalSummary,
    minus: &EmpiricalSummary,
    n: usize,
) -> Result<f64> {
    profile_at(target.alpha_vec(), target.sigma(), plus, minus, n)
}

/// The profile formula for an arbitrary symmetric `Σ`.
pub(crate) fn profile_at(
    alpha: Vector2<f64>,
    sigma: Matrix2<f64>,
    plus: &EmpiricalSummary,
    minus: &EmpiricalSummary,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let center = MomentTarget::from_summaries(plus, minus);
    let inv = inverse_sigma(&center)?;
    let a_n = center.alpha_vec();
    let g = a_n.dot(&(inv * a_n));
    if !(g < 1.0) {
        return Err(Error::GramBoundViolated(g));
    }
    let nf = n as f64;
    let denom = 1.0 - g;
    let d = alpha - a_n;
    let big_d = center.sigma() - sigma;
    let w = inv * a_n;
    let d2 = big_d * big_d;

    let t1 = d.dot(&d) / (4.0 * nf * denom);
    let t2 = w.dot(&(d2 * w)) / (4.0 * nf * denom);
    let t3 = w.dot(&(big_d * d)) / (2.0 * nf * denom);
    let t4 = (big_d * inv * big_d).trace() / (2.0 * nf);
    // E[uᵀ K u] = Tr(K E[uuᵀ]) = Tr(K Σₙ) with K = Σₙ⁻¹D²Σₙ⁻¹.
    let t5 = (inv * d2 * inv * center.sigma()).trace() / (4.0 * nf);
    Ok(t1 + t2 + t3 + t4 + t5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSelection {
    pub chi: f64,
    /// `√(profile_quantile / 2)`.
    pub delta_hat: f64,
    pub resamples: usize,
    /// Lower empirical `(1 − χ)`-quantile of the bootstrap profile values.
    pub profile_quantile: f64,
    pub n: usize,
    pub gram_bound: f64,
}

/// Bootstrap the profile of resampled moments against the empirical ones and
/// threshold it at `2δ²`.
///
/// Both sides must hold the same number of samples. Round `r` draws from the
/// ChaCha8 stream `r` of `seed`, so rounds are independent of each other and
/// of the round count.
pub fn select_radius(
    samples_plus: &[f64],
    samples_minus: &[f64],
    chi: f64,
    resamples: usize,
    seed: u64,
) -> Result<RadiusSelection> {
    if !(chi > 0.0 && chi < 1.0) {
        return Err(Error::InvalidChi(chi));
    }
    if resamples < MIN_RESAMPLES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_RESAMPLES} resamples required, got {resamples}"
        )));
    }
    let n = samples_plus.len();
    if n != samples_minus.len() {
        return Err(Error::InvalidParameter(format!(
            "sample sizes differ: {n} buy vs {} sell",
            samples_minus.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least 2 samples per side required, got {n}"
        )));
    }
    let plus = EmpiricalSummary::from_values(samples_plus)?;
    let minus = EmpiricalSummary::from_values(samples_minus)?;
    let gram_bound = gram_bound_check(&plus, &minus)?;

    let mut values = Vec::with_capacity(resamples);
    let mut draws_p = vec![0.0; n];
    let mut draws_m = vec![0.0; n];
    for round in 0..resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round as u64);
        for d in draws_p.iter_mut() {
            *d = samples_plus[rng.random_range(0..n)];
        }
        for d in draws_m.iter_mut() {
            *d = samples_minus[rng.random_range(0..n)];
        }
        let sp = EmpiricalSummary::from_values(&draws_p)?;
        let sm = EmpiricalSummary::from_values(&draws_m)?;
        let target = MomentTarget::from_summaries(&sp, &sm);
        values.push(robust_profile(&target, &plus, &minus, n)?);
    }
    values.sort_by(f64::total_cmp);
    let profile_quantile = lower_quantile_sorted(&values, 1.0 - chi);
    Ok(RadiusSelection {
        chi,
        delta_hat: (profile_quantile.max(0.0) / 2.0).sqrt(),
        resamples,
        profile_quantile,
        n,
        gram_bound,
    })
}
