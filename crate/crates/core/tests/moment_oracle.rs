mod common;

use rand::Rng;

use wrmm_core::{
    alpha_range, beta_bounds, moment_range_search, DiscreteMeasure, EmpiricalSummary,
    SearchObjective, SupportSpec,
};

use common::rel_err;

#[test]
fn search_reproduces_mean_range_and_upper_envelope() {
    let mut rng = common::rng(11);
    for _ in 0..8 {
        let n = rng.random_range(2..=6);
        let values = common::uniform_values(&mut rng, n, -2.0, 2.0);
        let emp = DiscreteMeasure::uniform(values.clone()).unwrap();
        let s = EmpiricalSummary::from_values(&values).unwrap();
        for delta in [0.01, 0.04, 0.25] {
            let support = SupportSpec::around(&emp, delta);
            let range = alpha_range(&s, delta).unwrap();
            let hi = moment_range_search(&emp, delta, SearchObjective::MaxMean, &support).unwrap();
            let lo = moment_range_search(&emp, delta, SearchObjective::MinMean, &support).unwrap();
            assert!(rel_err(hi, range.hi) < 1e-6, "{hi} vs {}", range.hi);
            assert!(rel_err(lo, range.lo) < 1e-6, "{lo} vs {}", range.lo);

            for k in 1..=5 {
                let a = range.lo + range.width() * k as f64 / 6.0;
                let u = beta_bounds(&s, delta, a).unwrap().upper;
                let o = moment_range_search(
                    &emp,
                    delta,
                    SearchObjective::MaxSecondMomentGivenMean(a),
                    &support,
                )
                .unwrap();
                assert!(
                    rel_err(o, u) < 1e-6,
                    "n={n} delta={delta} alpha={a}: {o} vs {u}"
                );
                // A feasible candidate can never beat the supremum.
                assert!(o <= u + 1e-9 * u.abs().max(1.0));
            }
        }
    }
}

#[test]
fn constant_samples_have_pure_budget_envelope() {
    let values = vec![0.4; 5];
    let emp = DiscreteMeasure::uniform(values.clone()).unwrap();
    let s = EmpiricalSummary::from_values(&values).unwrap();
    let delta = 0.09;
    let support = SupportSpec::around(&emp, delta);
    for a in [0.2, 0.4, 0.55] {
        let u = beta_bounds(&s, delta, a).unwrap().upper;
        let d = a - 0.4;
        assert!((u - (delta - d * d + a * a)).abs() < 1e-14);
        let o = moment_range_search(
            &emp,
            delta,
            SearchObjective::MaxSecondMomentGivenMean(a),
            &support,
        )
        .unwrap();
        assert!(rel_err(o, u) < 1e-6, "{o} vs {u}");
    }
}
