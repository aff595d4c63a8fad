mod common;

use rand::Rng;
use rand_distr::StandardNormal;
use wrmm_core::{
    product_w2_squared, robust_profile, select_radius, DiscreteMeasure, EmpiricalSummary,
    MomentTarget,
};

fn permutations3() -> Vec<[usize; 3]> {
    vec![
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

/// Cheapest product coupling of two uniform 3-atom product measures, built
/// from one permutation per coordinate and costed on the joint atoms.
fn enumerated_product_cost(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for s1 in permutations3() {
        for s2 in permutations3() {
            let mut cost = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let dx = p1[i] - q1[s1[i]];
                    let dy = p2[j] - q2[s2[j]];
                    cost += (dx * dx + dy * dy) / 9.0;
                }
            }
            best = best.min(cost);
        }
    }
    best
}

#[test]
fn product_distance_matches_coupling_enumeration() {
    let mut rng = common::rng(51);
    for _ in 0..200 {
        let atoms: Vec<Vec<f64>> = (0..4)
            .map(|_| common::uniform_values(&mut rng, 3, -2.0, 2.0))
            .collect();
        let m: Vec<DiscreteMeasure> = atoms
            .iter()
            .map(|a| DiscreteMeasure::uniform(a.clone()).unwrap())
            .collect();
        let got = product_w2_squared(&m[0], &m[1], &m[2], &m[3]);
        let want = enumerated_product_cost(&atoms[0], &atoms[1], &atoms[2], &atoms[3]);
        assert!(
            (got - want).abs() <= 1e-12 * (1.0 + want),
            "{got} vs {want}"
        );
    }
}

/// The percentile bootstrap undercovers at small n: long runs give about
/// 0.865 at n = 100 against the nominal 0.9, so the bound here leaves room
/// for that bias plus two standard errors of a 500-draw estimate.
#[test]
fn bootstrap_radius_nearly_covers_true_moments() {
    let mut rng = common::rng(52);
    let truth = MomentTarget::new(0.0, 0.0, 1.0, 1.0).unwrap();
    let (n, draws) = (100, 500);
    let mut covered = 0;
    for k in 0..draws {
        let plus: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let minus: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let sel = select_radius(&plus, &minus, 0.1, 500, k as u64).unwrap();
        let sp = EmpiricalSummary::from_values(&plus).unwrap();
        let sm = EmpiricalSummary::from_values(&minus).unwrap();
        let r = robust_profile(&truth, &sp, &sm, n).unwrap();
        if r <= 2.0 * sel.delta_hat * sel.delta_hat {
            covered += 1;
        }
    }
    let rate = covered as f64 / draws as f64;
    assert!(rate >= 0.83, "coverage {rate}");
}
