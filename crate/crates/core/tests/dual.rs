mod common;

use common::*;
use mixfleet::dual::{
    dual_value, lagrangian, run_dual, wage_lagrangian, zone_lagrangian, zone_subproblem, DualConfig, DualError,
    GridSpec, Termination,
};
use mixfleet::model::BehaviorParams;
use mixfleet::refine::{refine, RefineConfig};
use mixfleet::scenario::{generate_instance, GeneratorConfig};
use ndarray::Array1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_grid_config() -> DualConfig {
    DualConfig { idle_cap: Some(200.0), ..DualConfig::default() }
}

#[test]
fn zone_grid_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params = small_params();
    let coarse = DualConfig {
        fare_grid: GridSpec::new(0.05, 5.0, 20),
        idle_points: 20,
        ..small_grid_config()
    };
    let inst = random_instance(&mut rng, 1);
    for mu in [0.05, 0.3, 0.6] {
        let got = zone_subproblem(&inst, &params, 0, mu, &coarse);
        let (r, a, h, best) = zone_grid_oracle(&inst, &params, 0, mu, &coarse, 200);
        let fare_cell = coarse.fare_grid.spacing();
        let idle_cell = coarse.idle_cap(&params) / 19.0;
        assert!((got.r - r).abs() <= fare_cell, "mu {mu}: fare {} vs {r}", got.r);
        let (n, n_star) = (got.idle_av + got.idle_h, a + h);
        assert!((n - n_star).abs() <= idle_cell, "mu {mu}: idle {n} vs {n_star}");
        assert!(got.value >= best - 1e-9 * best.abs(), "mu {mu}: value {} vs {best}", got.value);
    }
}

#[test]
fn single_zone_bound_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let params = BehaviorParams::san_francisco();
    let config = DualConfig { idle_cap: Some(400.0), ..DualConfig::default() };
    for _ in 0..3 {
        // thick markets: where serving a zone barely pays, the zone's hours
        // jump to zero along μ and the bound is no longer tight
        let inst = random_instance(&mut rng, 1).with_demand_scale(10.0).unwrap();
        let relaxed = run_dual(&inst, &params, &config, false).unwrap();
        let oracle = single_zone_relaxed_oracle(&inst, &params, &config, 120);
        assert!(relaxed.upper_bound >= oracle - 1e-9 * oracle, "bound {} below {oracle}", relaxed.upper_bound);
        assert!(relaxed.upper_bound <= oracle * 1.001, "bound {} far above {oracle}", relaxed.upper_bound);
    }
}

#[test]
fn dual_values_bound_refined_profits() {
    let params = BehaviorParams::san_francisco();
    let inst = generate_instance(31, 6, &GeneratorConfig::default());
    let config = DualConfig::default();
    let relaxed = run_dual(&inst, &params, &config, false).unwrap();
    let report = refine(&inst, &params, &relaxed, &RefineConfig::matching(&config)).unwrap();
    assert!(report.profit <= relaxed.upper_bound * (1.0 + 1e-9));
    for mu_hour in [0.0, 5.0, 15.0, 26.0, 40.0, 60.0] {
        let l = dual_value(&inst, &params, mu_hour / 60.0, false, &config).unwrap();
        assert!(l >= report.profit, "L({mu_hour} $/h) = {l} below profit {}", report.profit);
    }
}

#[test]
fn zero_step_ends_at_max_iters_with_initial_bound() {
    let params = BehaviorParams::san_francisco();
    let inst = generate_instance(32, 4, &GeneratorConfig::default());
    let config = DualConfig { tau0: Some(0.0), max_iters: 8, ..DualConfig::default() };
    let relaxed = run_dual(&inst, &params, &config, false).unwrap();
    assert_eq!(relaxed.termination, Termination::MaxIters);
    assert_eq!(relaxed.iterations, 8);
    assert!(relaxed.mu_trace.iter().all(|m| *m == relaxed.mu0));
    let l0 = dual_value(&inst, &params, relaxed.mu0, false, &config).unwrap();
    assert_eq!(relaxed.upper_bound, l0);
}

#[test]
fn cheap_avs_leave_almost_no_idle_humans() {
    let params = BehaviorParams::san_francisco().with_av_cost(5.0);
    let inst = generate_instance(1, 19, &GeneratorConfig::default());
    let relaxed = run_dual(&inst, &params, &DualConfig::default(), false).unwrap();
    assert_eq!(relaxed.termination, Termination::Feasible);
    assert!(relaxed.residual <= 1e-4, "residual {}", relaxed.residual);
    let (h, a) = (relaxed.idle_h.sum(), relaxed.idle_av.sum());
    assert!(h <= 0.01 * a, "idle humans {h} against idle AVs {a}");
}

#[test]
fn regulated_multiplier_stays_nonnegative() {
    let inst = generate_instance(33, 5, &GeneratorConfig::default());
    for q_min in [0.0, 20.0, 35.0] {
        let params = BehaviorParams::san_francisco().with_wage_floor(Some(q_min));
        let relaxed = run_dual(&inst, &params, &DualConfig::default(), true).unwrap();
        assert!(relaxed.mu_trace.iter().all(|m| *m >= 0.0), "q_min {q_min}: {:?}", relaxed.mu_trace);
        assert!(relaxed.q >= q_min);
    }
}

#[test]
fn oversized_step_reports_divergence() {
    let params = BehaviorParams::san_francisco();
    let inst = generate_instance(34, 4, &GeneratorConfig::default());
    let config = DualConfig { tau0: Some(1e9), mu0: Some(0.01), ..DualConfig::default() };
    match run_dual(&inst, &params, &config, false) {
        Err(DualError::Divergent { tau0, .. }) => assert_eq!(tau0, 1e9),
        other => panic!("expected divergence, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn zone_and_wage_terms_add_up_to_lagrangian(
        seed in any::<u64>(),
        m in 1usize..6,
        mu in -0.5f64..1.5,
        q in 1.0f64..60.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, m);
        let params = small_params();
        let d = random_decision(&mut rng, m, 40.0);
        let idle_h = Array1::from_iter(d.idle_av.iter().rev().map(|a| 0.5 * a));
        let split: f64 = (0..m)
            .map(|i| zone_lagrangian(&inst, &params, i, mu, d.r[i], d.idle_av[i], idle_h[i]))
            .sum::<f64>()
            + wage_lagrangian(&params, mu, q);
        let direct = lagrangian(&inst, &params, mu, q, params.willing_supply(q), &d.r, &d.idle_av, &idle_h);
        prop_assert!((split - direct).abs() <= 1e-9 * direct.abs().max(1.0), "{split} vs {direct}");
    }
}
