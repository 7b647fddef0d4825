mod common;

use common::*;
use mixfleet::equilibrium::{
    assemble_state, check_existence_conditions, constraint_residuals, equilibrium_fixed_point, min_cost_flow,
    solve_idle_scalar, EquilibriumConfig,
};
use mixfleet::model::{BehaviorParams, NetworkInstance, PlatformDecision};
use mixfleet::scenario::{generate_instance, GeneratorConfig};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn single_zone_matches_budget_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = small_params();
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 1);
        let d = random_decision(&mut rng, 1, 30.0);
        let eq = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
        let oracle = single_zone_idle_oracle(&inst, &params, &d);
        let got = eq.state.idle_h[0];
        assert!((got - oracle).abs() <= 1e-8 * oracle.max(1.0), "{got} vs {oracle}");
    }
}

#[test]
fn symmetric_pair_splits_evenly() {
    let inst = NetworkInstance::new(
        zones(2),
        array![[6.0, 11.0], [11.0, 6.0]],
        array![[3.0, 1.5], [1.5, 3.0]],
        array![[14.0, 20.0], [20.0, 14.0]],
    )
    .unwrap();
    let params = small_params();
    let d = PlatformDecision::new(30.0, array![1.0, 1.0], array![12.0, 12.0]);
    let eq = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
    let x = &eq.state.idle_h;
    assert!((x[0] - x[1]).abs() <= 1e-8 * x[0], "{x}");
}

#[test]
fn two_zones_match_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let params = small_params();
    let resolution = 1e-3;
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 2);
        let d = random_decision(&mut rng, 2, 30.0);
        let eq = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
        let (oracle, best) = two_zone_equilibrium_oracle(&inst, &params, &d, resolution);
        let cell = resolution * d.human_hours(&params);
        assert!(best <= 1e-2, "oracle residual {best}");
        for i in 0..2 {
            let diff = (eq.state.idle_h[i] - oracle[i]).abs();
            assert!(diff <= 10.0 * cell, "zone {i}: {} vs {} (cell {cell})", eq.state.idle_h[i], oracle[i]);
        }
    }
}

#[test]
fn scalar_inversion_examples() {
    let inst = generate_instance(4, 5, &GeneratorConfig::default());
    let params = BehaviorParams::san_francisco();
    let d = PlatformDecision::new(30.0, Array1::from_elem(5, 1.0), Array1::from_elem(5, 20.0));
    assert_eq!(solve_idle_scalar(&inst, 2, 0.0, &d, &params, 1e-10).unwrap(), 0.0);
    // the pickup rate at 100 idle drivers, from the elementary formulas
    let i = 2;
    let n = 100.0 + d.idle_av[i];
    let w = params.wait_coeff / n.sqrt();
    let pickups: f64 = (0..5)
        .map(|j| {
            let c = mixfleet::model::generalized_cost(params.alpha, w, d.r[i], inst.travel_time()[[i, j]]);
            mixfleet::model::demand_rate(inst.potential_demand()[[i, j]], c, inst.outside_cost()[[i, j]], params.eps)
        })
        .sum::<f64>()
        * 100.0
        / n;
    let x = solve_idle_scalar(&inst, i, pickups, &d, &params, 1e-10).unwrap();
    assert!((x - 100.0).abs() <= 1e-8, "{x}");
    assert!(solve_idle_scalar(&inst, i, 1e9, &d, &params, 1e-10).is_err());
}

#[test]
fn existence_report_examples() {
    let params = BehaviorParams::san_francisco();
    let inst = generate_instance(1, 19, &GeneratorConfig::default());
    let d = PlatformDecision::new(26.0, Array1::from_elem(19, 0.9), Array1::zeros(19));
    let report = check_existence_conditions(&inst, &params, &d);
    assert!(report.demand_vanishes_without_supply && report.wait_weighted_demand_vanishes);
    assert!(report.all_pass(), "{:?}", report.failing_zones());

    let empty = NetworkInstance::new(zones(3), Array2::from_elem((3, 3), 5.0), Array2::zeros((3, 3)), Array2::from_elem((3, 3), 10.0))
        .unwrap();
    let d = PlatformDecision::new(26.0, Array1::from_elem(3, 0.9), Array1::zeros(3));
    let report = check_existence_conditions(&empty, &params, &d);
    assert_eq!(report.failing_zones(), vec![0, 1, 2]);
}

#[test]
fn assemble_state_examples() {
    let params = small_params();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let inst = random_instance(&mut rng, 4);
    let d = PlatformDecision::new(30.0, Array1::from_elem(4, 1.0), Array1::zeros(4));
    let eq = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
    assert_eq!(eq.state.n_a, 0.0);
    assert!((eq.state.n_h - d.human_hours(&params)).abs() <= 1e-6 * eq.state.n_h);

    let empty = NetworkInstance::new(zones(3), Array2::from_elem((3, 3), 5.0), Array2::zeros((3, 3)), Array2::from_elem((3, 3), 10.0))
        .unwrap();
    let d = PlatformDecision::new(30.0, Array1::from_elem(3, 1.0), array![4.0, 0.0, 2.5]);
    let state = assemble_state(&empty, &params, &d, &Array1::from_elem(3, 1.0)).unwrap();
    assert_eq!(state.n_a, 6.5);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let inst = generate_instance(9, 19, &GeneratorConfig::default());
    let params = BehaviorParams::san_francisco();
    let d = PlatformDecision::new(27.0, Array1::from_elem(19, 0.8), Array1::from_elem(19, 15.0));
    let a = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
    let b = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
    assert_eq!(a, b);
}

fn instance_and_decision() -> impl Strategy<Value = (NetworkInstance, PlatformDecision)> {
    (any::<u64>(), prop::sample::select(vec![1usize, 2, 3, 5])).prop_map(|(seed, m)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, m);
        let d = random_decision(&mut rng, m, 30.0);
        (inst, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn converged_states_meet_constraints((inst, d) in instance_and_decision()) {
        let params = small_params();
        let eq = equilibrium_fixed_point(&inst, &params, &d, &EquilibriumConfig::default()).unwrap();
        let res = constraint_residuals(&inst, &params, &d, &eq.state);
        prop_assert!(res.max() <= 1e-6, "{:?}", res.named());
        let budget = d.human_hours(&params);
        for x in eq.state.idle_h.iter() {
            prop_assert!(*x > 0.0 && *x <= budget, "idle humans {x} outside (0, {budget}]");
        }
    }

    #[test]
    fn transport_matches_basis_enumeration(
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        costs in prop::array::uniform9(0.5f64..20.0),
    ) {
        let supply = [a, b, -a - b];
        let cost = Array2::from_shape_vec((3, 3), costs.to_vec()).unwrap();
        let f = min_cost_flow(&Array1::from(supply.to_vec()), &cost);
        for i in 0..3 {
            prop_assert_eq!(f[[i, i]], 0.0);
            let net = f.row(i).sum() - f.column(i).sum();
            prop_assert!((net - supply[i]).abs() <= 1e-10 * 10.0, "node {i}: {net} vs {}", supply[i]);
        }
        let got: f64 = f.iter().zip(cost.iter()).map(|(x, c)| x * c).sum();
        let oracle = three_node_transport_oracle(&supply, &cost);
        prop_assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0), "{got} vs {oracle}");
    }
}
