mod common;

use wrmm_core::{
    draw_order_flow, gibbs_policy, shift_experiment, simulate_policy, EmpiricalSummary,
    FunctionSpec, MetaDistribution, Moments, Quadrature, ShiftSpec, SideShift, SolverOptions,
    SpreadDomain, SpreadModel, WorstCaseProblem,
};

const BUY: [f64; 6] = [-1.2, -0.3, 0.1, 0.4, 0.9, 1.6];
const SELL: [f64; 5] = [-0.8, -0.5, 0.2, 0.7, 1.1];

fn model() -> SpreadModel {
    SpreadModel {
        s: 10.0,
        q: 1.0,
        eta: 0.1,
        gamma: 5.0,
        f_plus: FunctionSpec::exp_decay(2.0, 1.0),
        f_minus: FunctionSpec::exp_decay(2.0, 1.0),
        h_plus: FunctionSpec::exp_decay(0.5, 0.5),
        h_minus: FunctionSpec::exp_decay(0.5, 0.5),
    }
}

fn domain() -> SpreadDomain {
    SpreadDomain::new(2.0, 65, Quadrature::Trapezoid).unwrap()
}

#[test]
fn standard_normal_flow_has_unit_moments() {
    let m = SpreadModel {
        f_plus: FunctionSpec::ZERO,
        f_minus: FunctionSpec::ZERO,
        h_plus: FunctionSpec::constant(1.0),
        h_minus: FunctionSpec::constant(1.0),
        ..model()
    };
    let g = MetaDistribution::gaussian(0.0, 1.0).unwrap();
    let mut rng = common::rng(41);
    let n = 100_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let (dp, _) = draw_order_flow(&g, &g, &m, 0.5, 0.5, &mut rng);
        s1 += dp;
        s2 += dp * dp;
    }
    let nf = n as f64;
    assert!((s1 / nf).abs() <= 3.0 / nf.sqrt(), "mean {}", s1 / nf);
    // Var(X²) = 2 for a standard normal.
    assert!(
        (s2 / nf - 1.0).abs() <= 3.0 * 2f64.sqrt() / nf.sqrt(),
        "second moment {}",
        s2 / nf
    );
}

#[test]
fn matched_setting_converges_to_quadrature_expectation() {
    let (p, m) = (
        EmpiricalSummary::from_values(&BUY).unwrap(),
        EmpiricalSummary::from_values(&SELL).unwrap(),
    );
    let moments = Moments::empirical(&p, &m);
    let policy = gibbs_policy(&model(), &domain(), &moments).unwrap();
    let expected = policy.expected_reward(&model(), &moments);
    let (bp, bm) = (
        MetaDistribution::empirical(BUY.to_vec()).unwrap(),
        MetaDistribution::empirical(SELL.to_vec()).unwrap(),
    );
    let small = simulate_policy(&policy, &model(), &bp, &bm, 1_000, 5).unwrap();
    let large = simulate_policy(&policy, &model(), &bp, &bm, 100_000, 5).unwrap();
    assert!(
        (large.mean_objective - expected).abs() <= 3.0 * large.std_err,
        "{} ± {} vs {expected}",
        large.mean_objective,
        large.std_err
    );
    let ratio = small.std_err / large.std_err;
    assert!(
        (8.0..=12.0).contains(&ratio),
        "standard error ratio {ratio}"
    );
}

#[test]
fn robust_policy_holds_up_under_worst_case_shift() {
    let (p, m) = (
        EmpiricalSummary::from_values(&BUY).unwrap(),
        EmpiricalSummary::from_values(&SELL).unwrap(),
    );
    let delta = 0.1;
    let problem = WorstCaseProblem::new(&model(), &domain(), &p, &m, delta).unwrap();
    let sol = problem.solve(&SolverOptions::default()).unwrap();

    // Affine image of each empirical law carrying it to the worst-case moments.
    let to_worst = |s: &EmpiricalSummary, a: f64, b: f64| SideShift {
        mean_shift: a - s.alpha_n,
        sd_scale: (b - a * a).sqrt() / s.variance.sqrt(),
    };
    let shift = ShiftSpec {
        plus: to_worst(&p, sol.alpha_star_plus, sol.beta_star_plus),
        minus: to_worst(&m, sol.alpha_star_minus, sol.beta_star_minus),
    };
    assert!(shift.plus.w2_squared(p.variance) <= delta * (1.0 + 1e-9));
    assert!(shift.minus.w2_squared(m.variance) <= delta * (1.0 + 1e-9));

    let report = shift_experiment(
        &BUY,
        &SELL,
        &model(),
        &domain(),
        &[0.0, delta],
        &shift,
        100_000,
        9,
        &SolverOptions::default(),
    )
    .unwrap();
    let (naive, robust) = (report.rows[0], report.rows[1]);
    let pooled = (naive.std_err.powi(2) + robust.std_err.powi(2)).sqrt();
    assert!(
        robust.mean_objective >= naive.mean_objective - 3.0 * pooled,
        "robust {} vs non-robust {} (pooled se {pooled})",
        robust.mean_objective,
        naive.mean_objective
    );
}
