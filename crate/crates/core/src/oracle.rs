//! Brute-force ground truth: exact 1-D W₂ between discrete measures and
//! searches over small discrete measures inside a W₂ ball.
//!
//! Everything here favours transparency over speed. The searches are meant
//! for a handful of atoms and exist to check the closed forms in
//! [`crate::moments`] and [`crate::profile`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidMeasure(m));
        if atoms.is_empty() {
            return bad("no atoms".into());
        }
        if atoms.len() != weights.len() {
            return bad(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            ));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return bad("atoms must be finite".into());
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return bad("weights must be non-negative".into());
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return bad(format!("weights sum to {total}"));
        }
        Ok(Self { atoms, weights })
    }

    /// Equal weights on the given atoms; the empirical measure of a sample.
    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let w = 1.0 / atoms.len().max(1) as f64;
        let weights = vec![w; atoms.len()];
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidMeasure("atoms must be finite".into()));
        }
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a * w)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a * a)
            .sum()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| a + c).collect(),
            weights: self.weights.clone(),
        }
    }

    fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .filter(|&(_, w)| w > 0.0)
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// `W₂²` by the monotone (quantile) coupling, merging the two cumulative
/// weight partitions.
pub fn w2_squared(p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
    let a = p.sorted_pairs();
    let b = q.sorted_pairs();
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut cost = 0.0;
    loop {
        let m = ra.min(rb);
        let d = a[i].0 - b[j].0;
        cost += m * d * d;
        ra -= m;
        rb -= m;
        let (adv_a, adv_b) = if ra == rb {
            (true, true)
        } else {
            (ra < rb, rb < ra)
        };
        if adv_a {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = a[i].1;
        }
        if adv_b {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = b[j].1;
        }
    }
    cost.max(0.0)
}

pub fn w2_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
    w2_squared(p, q).sqrt()
}

/// `W₂²` between two product measures under squared Euclidean cost: the sum
/// of the marginal `W₂²`.
pub fn product_w2_squared(
    p1: &DiscreteMeasure,
    q1: &DiscreteMeasure,
    p2: &DiscreteMeasure,
    q2: &DiscreteMeasure,
) -> f64 {
    w2_squared(p1, q1) + w2_squared(p2, q2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "snake_case")]
pub enum SearchObjective {
    MaxMean,
    MinMean,
    /// Largest second moment among measures with the given mean.
    MaxSecondMomentGivenMean(f64),
    /// Smallest second moment among measures with the given mean.
    MinSecondMomentGivenMean(f64),
}

/// Bounds on candidate atom positions and their number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportSpec {
    pub lo: f64,
    pub hi: f64,
    pub max_atoms: usize,
}

pub const MAX_ATOMS: usize = 6;

impl SupportSpec {
    /// `[min − 3√δ, max + 3√δ]` around the empirical atoms.
    pub fn around(empirical: &DiscreteMeasure, delta: f64) -> Self {
        let r = 3.0 * delta.max(0.0).sqrt();
        let lo = empirical
            .atoms
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = empirical
            .atoms
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            lo: lo - r,
            hi: hi + r,
            max_atoms: MAX_ATOMS,
        }
    }

    fn contains(&self, atoms: &[f64]) -> bool {
        atoms.iter().all(|&a| a >= self.lo && a <= self.hi)
    }
}

/// Grid points per angle in the first-pass sphere search.
const ANGLE_GRID: usize = 9;
const REFINE_TOL: f64 = 1e-8;
const REFINE_STARTS: usize = 3;
const SIMPLEX_STEP: f64 = 0.05;
const POSITION_GRID: usize = 11;

/// Empirical atoms with positive weight; a single atom is split in two so
/// that spread-out candidates exist.
fn working_atoms(empirical: &DiscreteMeasure) -> (Vec<f64>, Vec<f64>) {
    let (mut xi, mut w): (Vec<f64>, Vec<f64>) = empirical
        .atoms
        .iter()
        .zip(&empirical.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&a, &w)| (a, w))
        .unzip();
    if xi.len() == 1 {
        xi.push(xi[0]);
        w = vec![0.5, 0.5];
    }
    (xi, w)
}

fn feasible(
    cand: &DiscreteMeasure,
    empirical: &DiscreteMeasure,
    delta: f64,
    support: &SupportSpec,
) -> bool {
    support.contains(&cand.atoms) && w2_squared(cand, empirical) <= delta * (1.0 + 1e-12) + 1e-300
}

/// Point on the unit sphere in `R^k` from `k − 1` spherical angles.
fn sphere_point(angles: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    let mut s = 1.0;
    for (i, &t) in angles.iter().enumerate() {
        out[i] = s * t.cos();
        s *= t.sin();
    }
    out[k - 1] = s;
    out
}

/// Maximizes `f` over the unit sphere in `R^k`: a product grid over the
/// spherical angles followed by compass refinement of the best few points.
fn sphere_search(k: usize, f: &dyn Fn(&[f64]) -> Option<f64>) -> Option<f64> {
    if k == 1 {
        return [f(&[1.0]), f(&[-1.0])]
            .into_iter()
            .flatten()
            .reduce(f64::max);
    }
    let dims = k - 1;
    let angle = |d: usize, i: usize| {
        if d + 1 == dims {
            2.0 * std::f64::consts::PI * i as f64 / ANGLE_GRID as f64
        } else {
            std::f64::consts::PI * i as f64 / (ANGLE_GRID - 1) as f64
        }
    };
    let eval = |angles: &[f64]| f(&sphere_point(angles, k));
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; dims];
    loop {
        let angles: Vec<f64> = idx.iter().enumerate().map(|(d, &i)| angle(d, i)).collect();
        if let Some(v) = eval(&angles) {
            top.push((v, angles));
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(REFINE_STARTS);
        }
        let mut d = 0;
        loop {
            if d == dims {
                return refine_angles(top, &eval);
            }
            idx[d] += 1;
            if idx[d] < ANGLE_GRID {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn refine_angles(
    starts: Vec<(f64, Vec<f64>)>,
    eval: &dyn Fn(&[f64]) -> Option<f64>,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (mut fx, mut x) in starts {
        let mut step = std::f64::consts::PI / (ANGLE_GRID - 1) as f64;
        while step > REFINE_TOL {
            let mut moved = false;
            for d in 0..x.len() {
                for sgn in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[d] += sgn * step;
                    if let Some(fy) = eval(&y) {
                        if fy > fx {
                            x = y;
                            fx = fy;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = Some(best.map_or(fx, |b: f64| b.max(fx)));
    }
    best
}

/// Orthonormal basis of the complement of the unit vector `v` (Householder).
fn complement_basis(v: &[f64]) -> Vec<Vec<f64>> {
    let m = v.len();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut h = v.to_vec();
    h[0] += sign;
    let hh: f64 = h.iter().map(|x| x * x).sum();
    (1..m)
        .map(|c| {
            (0..m)
                .map(|r| {
                    let id = if r == c { 1.0 } else { 0.0 };
                    id - 2.0 * h[r] * h[c] / hh
                })
                .collect()
        })
        .collect()
}

/// Signed value to maximize for an objective, given a candidate measure.
fn score(objective: SearchObjective, cand: &DiscreteMeasure) -> f64 {
    match objective {
        SearchObjective::MaxMean => cand.mean(),
        SearchObjective::MinMean => -cand.mean(),
        SearchObjective::MaxSecondMomentGivenMean(_) => cand.second_moment(),
        SearchObjective::MinSecondMomentGivenMean(_) => -cand.second_moment(),
    }
}

fn sign(objective: SearchObjective) -> f64 {
    match objective {
        SearchObjective::MaxMean | SearchObjective::MaxSecondMomentGivenMean(_) => 1.0,
        _ => -1.0,
    }
}

fn target_mean(objective: SearchObjective) -> Option<f64> {
    match objective {
        SearchObjective::MaxSecondMomentGivenMean(a)
        | SearchObjective::MinSecondMomentGivenMean(a) => Some(a),
        _ => None,
    }
}

/// Best value of `objective` over discrete measures with `W₂² ≤ delta` from
/// `empirical`.
///
/// The first pass moves each empirical atom along a direction on the sphere
/// of the transport budget (uniform coupling to the empirical atoms). The
/// second pass tries two- and three-atom measures with weights on a simplex
/// grid and positions on a grid over the support, each verified by an exact
/// `W₂` computation. The best candidates are refined by coordinate descent.
pub fn moment_range_search(
    empirical: &DiscreteMeasure,
    delta: f64,
    objective: SearchObjective,
    support: &SupportSpec,
) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::NegativeRadius(delta));
    }
    if empirical.len() > support.max_atoms {
        return Err(Error::InvalidParameter(format!(
            "{} empirical atoms exceed the search limit of {}",
            empirical.len(),
            support.max_atoms
        )));
    }
    let alpha_n = empirical.mean();
    let root = delta.sqrt();
    let slack = 1e-12 * (1.0 + root);
    if let Some(a) = target_mean(objective) {
        if !a.is_finite() || (a - alpha_n).abs() > root + slack {
            return Err(Error::NoFeasibleMeasure);
        }
    }
    if delta == 0.0 {
        return Ok(sign(objective) * score(objective, empirical));
    }

    let first = first_pass(empirical, delta, objective, support);
    let second = second_pass(empirical, delta, objective, support);
    let best = [first, second].into_iter().flatten().reduce(f64::max);
    best.map(|v| sign(objective) * v)
        .ok_or(Error::NoFeasibleMeasure)
}

fn first_pass(
    empirical: &DiscreteMeasure,
    delta: f64,
    objective: SearchObjective,
    support: &SupportSpec,
) -> Option<f64> {
    let (xi, w) = working_atoms(empirical);
    let m = xi.len();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let build = |z: Vec<f64>| DiscreteMeasure {
        atoms: z,
        weights: w.clone(),
    };
    let check = |cand: DiscreteMeasure| {
        feasible(&cand, empirical, delta, support).then(|| score(objective, &cand))
    };
    match target_mean(objective) {
        None => {
            let r = delta.sqrt();
            sphere_search(m, &|u| {
                let z = (0..m).map(|i| xi[i] + r * u[i] / sw[i]).collect();
                check(build(z))
            })
        }
        Some(alpha) => {
            let a = alpha - empirical.mean();
            let rho = (delta - a * a).max(0.0).sqrt();
            let basis = complement_basis(&sw);
            sphere_search(m - 1, &|u| {
                let z = (0..m)
                    .map(|i| {
                        let v: f64 = basis.iter().zip(u).map(|(b, c)| b[i] * c).sum();
                        xi[i] + a + rho * v / sw[i]
                    })
                    .collect();
                check(build(z))
            })
        }
    }
}

/// Enumerates positive weight vectors on the simplex grid.
fn simplex_weights(m: usize) -> Vec<Vec<f64>> {
    let steps = (1.0 / SIMPLEX_STEP).round() as usize;
    let mut out = Vec::new();
    match m {
        2 => {
            for i in 1..steps {
                out.push(vec![
                    i as f64 / steps as f64,
                    (steps - i) as f64 / steps as f64,
                ]);
            }
        }
        3 => {
            for i in 1..steps {
                for j in 1..steps - i {
                    let k = steps - i - j;
                    out.push(vec![
                        i as f64 / steps as f64,
                        j as f64 / steps as f64,
                        k as f64 / steps as f64,
                    ]);
                }
            }
        }
        _ => unreachable!("second pass uses two or three atoms"),
    }
    out
}

fn second_pass(
    empirical: &DiscreteMeasure,
    delta: f64,
    objective: SearchObjective,
    support: &SupportSpec,
) -> Option<f64> {
    let grid: Vec<f64> = (0..POSITION_GRID)
        .map(|i| support.lo + (support.hi - support.lo) * i as f64 / (POSITION_GRID - 1) as f64)
        .collect();
    let target = target_mean(objective);
    let candidate = |pos: &[f64], w: &[f64]| -> Option<(f64, DiscreteMeasure)> {
        let mut atoms = pos.to_vec();
        if let Some(a) = target {
            let mean: f64 = atoms.iter().zip(w).map(|(x, w)| x * w).sum();
            atoms.iter_mut().for_each(|x| *x += a - mean);
        }
        let cand = DiscreteMeasure {
            atoms,
            weights: w.to_vec(),
        };
        feasible(&cand, empirical, delta, support).then(|| (score(objective, &cand), cand))
    };

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut consider = |pos: &[f64], w: &[f64]| {
        if let Some((v, _)) = candidate(pos, w) {
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, pos.to_vec(), w.to_vec()));
            }
        }
    };
    for m in [2usize, 3] {
        let weights = simplex_weights(m);
        let k = grid.len();
        for i in 0..k {
            for j in i..k {
                if m == 2 {
                    for w in &weights {
                        consider(&[grid[i], grid[j]], w);
                    }
                    continue;
                }
                for l in j..k {
                    for w in &weights {
                        consider(&[grid[i], grid[j], grid[l]], w);
                    }
                }
            }
        }
    }

    let (mut fx, mut pos, w) = best?;
    let mut step = (support.hi - support.lo) / (POSITION_GRID - 1) as f64;
    while step > REFINE_TOL {
        let mut moved = false;
        for d in 0..pos.len() {
            for sgn in [1.0, -1.0] {
                let mut y = pos.clone();
                y[d] += sgn * step;
                if let Some((fy, _)) = candidate(&y, &w) {
                    if fy > fx {
                        pos = y;
                        fx = fy;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Some(fx)
}

/// Smallest `W₂²` from `empirical` to a measure with mean `alpha` and second
/// moment `beta`, searched over perturbations of the empirical atoms.
pub fn min_w2_squared_given_moments(
    empirical: &DiscreteMeasure,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !(beta >= alpha * alpha) {
        return Err(Error::NoFeasibleMeasure);
    }
    let (xi, w) = working_atoms(empirical);
    let m = xi.len();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let a = alpha - empirical.mean();
    let y: Vec<f64> = xi.iter().map(|x| x + a).collect();
    let b0: f64 = y.iter().zip(&w).map(|(y, w)| w * y * y).sum();
    let basis = complement_basis(&sw);
    let best = sphere_search(m - 1, &|u| {
        let v: Vec<f64> = (0..m)
            .map(|i| basis.iter().zip(u).map(|(b, c)| b[i] * c).sum())
            .collect();
        let c: f64 = (0..m).map(|i| sw[i] * y[i] * v[i]).sum();
        let disc = c * c - b0 + beta;
        if disc < 0.0 {
            return None;
        }
        let roots = [-c - disc.sqrt(), -c + disc.sqrt()];
        let rho = roots.into_iter().filter(|r| *r >= 0.0).reduce(f64::min)?;
        let cand = DiscreteMeasure {
            atoms: (0..m).map(|i| y[i] + rho * v[i] / sw[i]).collect(),
            weights: w.clone(),
        };
        Some(-w2_squared(&cand, empirical))
    });
    best.map(|v| -v).ok_or(Error::NoFeasibleMeasure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dm(atoms: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(atoms.to_vec(), weights.to_vec()).unwrap()
    }

    /// W₂² by enumerating every permutation coupling of two uniform measures
    /// with the same number of atoms.
    fn brute_uniform_w2_squared(a: &[f64], b: &[f64]) -> f64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for k in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(k, n - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(a.len())
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(i, &j)| (a[i] - b[j]).powi(2))
                    .sum::<f64>()
                    / a.len() as f64
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn distance_examples() {
        let p = dm(&[0.0, 2.0], &[0.5, 0.5]);
        assert_eq!(w2_distance(&p, &p), 0.0);
        assert_eq!(w2_distance(&dm(&[0.0], &[1.0]), &dm(&[3.0], &[1.0])), 3.0);
        let q = dm(&[1.0, 3.0], &[0.5, 0.5]);
        assert_eq!(w2_distance(&p, &q), 1.0);
        assert_eq!(brute_uniform_w2_squared(&[0.0, 2.0], &[3.0, 1.0]), 1.0);
    }

    #[test]
    fn unequal_weights_merge_partitions() {
        // Mass 0.25 of atom 0 goes to 1, the rest of atom 0 and all of atom 2
        // go to 4.
        let p = dm(&[0.0, 2.0], &[0.5, 0.5]);
        let q = dm(&[1.0, 4.0], &[0.25, 0.75]);
        let expected = 0.25 * 1.0 + 0.25 * 16.0 + 0.5 * 4.0;
        assert!((w2_squared(&p, &q) - expected).abs() < 1e-15);
    }

    #[test]
    fn invalid_measures() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0], vec![0.9]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn product_distance_adds_marginals() {
        let p = dm(&[-1.0, 1.0], &[0.5, 0.5]);
        let q = p.shifted(0.3);
        assert_eq!(product_w2_squared(&p, &p, &p, &p), 0.0);
        let v = product_w2_squared(&p, &q, &p, &q);
        assert!((v - 2.0 * 0.09).abs() < 1e-15);
    }

    #[test]
    fn search_examples() {
        let e = dm(&[-1.0, 1.0], &[0.5, 0.5]);
        let s = SupportSpec::around(&e, 0.25);
        let max_mean = moment_range_search(&e, 0.25, SearchObjective::MaxMean, &s).unwrap();
        assert!((max_mean - 0.5).abs() < 1e-9);
        let min_mean = moment_range_search(&e, 0.25, SearchObjective::MinMean, &s).unwrap();
        assert!((min_mean + 0.5).abs() < 1e-9);
        let beta =
            moment_range_search(&e, 0.25, SearchObjective::MaxSecondMomentGivenMean(0.0), &s)
                .unwrap();
        assert!((beta - 2.25).abs() < 1e-8);
        let at_zero = moment_range_search(&e, 0.0, SearchObjective::MaxMean, &s).unwrap();
        assert_eq!(at_zero, 0.0);
    }

    #[test]
    fn infeasible_mean_is_reported() {
        let e = dm(&[-1.0, 1.0], &[0.5, 0.5]);
        let s = SupportSpec::around(&e, 0.25);
        let r = moment_range_search(&e, 0.25, SearchObjective::MaxSecondMomentGivenMean(0.6), &s);
        assert_eq!(r.unwrap_err(), Error::NoFeasibleMeasure);
    }

    #[test]
    fn single_atom_is_split() {
        let e = dm(&[0.5], &[1.0]);
        let s = SupportSpec::around(&e, 0.09);
        let b = moment_range_search(&e, 0.09, SearchObjective::MaxSecondMomentGivenMean(0.6), &s)
            .unwrap();
        // Zero variance: u(α) = α² + δ − (α − αₙ)².
        assert!((b - (0.36 + 0.09 - 0.01)).abs() < 1e-8);
    }

    #[test]
    fn min_w2_matches_location_scale_map() {
        let e = DiscreteMeasure::uniform(vec![-1.0, 0.0, 2.0]).unwrap();
        let (alpha, beta) = (0.6, 2.5);
        let mean = e.mean();
        let sd = (e.second_moment() - mean * mean).sqrt();
        let gelbrich = (alpha - mean).powi(2) + ((beta - alpha * alpha).sqrt() - sd).powi(2);
        let found = min_w2_squared_given_moments(&e, alpha, beta).unwrap();
        assert!((found - gelbrich).abs() < 1e-8, "{found} vs {gelbrich}");
    }

    proptest! {
        #[test]
        fn metric_axioms(
            a in prop::collection::vec(-5.0f64..5.0, 1..6),
            b in prop::collection::vec(-5.0f64..5.0, 1..6),
            c in prop::collection::vec(-5.0f64..5.0, 1..6),
            shift in -3.0f64..3.0,
        ) {
            let (p, q, r) = (
                DiscreteMeasure::uniform(a).unwrap(),
                DiscreteMeasure::uniform(b).unwrap(),
                DiscreteMeasure::uniform(c).unwrap(),
            );
            prop_assert_eq!(w2_distance(&p, &q), w2_distance(&q, &p));
            prop_assert!(w2_distance(&p, &r) <= w2_distance(&p, &q) + w2_distance(&q, &r) + 1e-10);
            let moved = w2_distance(&p.shifted(shift), &q.shifted(shift));
            prop_assert!((moved - w2_distance(&p, &q)).abs() <= 1e-9);
        }

        #[test]
        fn quantile_coupling_is_optimal(
            a in prop::collection::vec(-5.0f64..5.0, 3),
            b in prop::collection::vec(-5.0f64..5.0, 3),
        ) {
            let p = DiscreteMeasure::uniform(a.clone()).unwrap();
            let q = DiscreteMeasure::uniform(b.clone()).unwrap();
            let brute = brute_uniform_w2_squared(&a, &b);
            prop_assert!((w2_squared(&p, &q) - brute).abs() <= 1e-12 * (1.0 + brute));
        }
    }
}
