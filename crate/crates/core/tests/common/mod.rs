#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wrmm_core::{EmpiricalSummary, FunctionSpec, SpreadModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_values<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// A model whose exponent stays within a few dozen units on `[0, 2]²`.
pub fn random_model<R: Rng>(rng: &mut R) -> SpreadModel {
    let f = FunctionSpec::exp_decay(rng.random_range(0.5..3.0), rng.random_range(0.3..2.0));
    let h = FunctionSpec::exp_decay(rng.random_range(0.2..1.0), rng.random_range(0.2..1.0));
    SpreadModel {
        s: rng.random_range(5.0..20.0),
        q: rng.random_range(-1.0..1.0),
        eta: rng.random_range(0.05..0.3),
        gamma: rng.random_range(2.0..10.0),
        f_plus: f,
        f_minus: FunctionSpec::exp_decay(rng.random_range(0.5..3.0), rng.random_range(0.3..2.0)),
        h_plus: h,
        h_minus: FunctionSpec::exp_decay(rng.random_range(0.2..1.0), rng.random_range(0.2..1.0)),
    }
}

pub fn random_summaries<R: Rng>(rng: &mut R) -> (EmpiricalSummary, EmpiricalSummary) {
    let np = rng.random_range(3..9);
    let nm = rng.random_range(3..9);
    (
        EmpiricalSummary::from_values(&uniform_values(rng, np, -2.0, 2.0)).unwrap(),
        EmpiricalSummary::from_values(&uniform_values(rng, nm, -2.0, 2.0)).unwrap(),
    )
}

/// Summaries with variance around `1e-3`, far below any radius used with them.
pub fn tight_summaries<R: Rng>(rng: &mut R) -> (EmpiricalSummary, EmpiricalSummary) {
    let side = |rng: &mut R| {
        let c = rng.random_range(-1.0..1.0);
        let v: Vec<f64> = uniform_values(rng, 4, -0.05, 0.05)
            .iter()
            .map(|x| c + x)
            .collect();
        EmpiricalSummary::from_values(&v).unwrap()
    };
    (side(rng), side(rng))
}

/// Unit-floored relative error.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
