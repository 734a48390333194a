mod common;

use common::*;
use platforming::lr::{
    aggregated_costs, dynamic_pool_update, lagrangian_value, lower_bound, subgradient_update, LagrangianSolver,
    LrParams, MultiplierPool, Occupancy, PoolStrategy, RouteArcPool, Termination, UbPolicy,
};
use platforming::oracle::{check_feasibility, solve_exact, ExactLimits};
use platforming::train_dp::solve_block;
use platforming::{ResourceId, Solution, SpaceTimeNetwork, TimeGrid, TrainPath, Weights};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny_net(seed: u64, n: usize) -> SpaceTimeNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trains: Vec<_> = (0..n)
        .map(|i| {
            let a = 300 + 15 * rng.gen_range(0..12);
            let dwell = 15 * rng.gen_range(1..4);
            train(&format!("t{i}"), a, a + dwell + 15, (dwell, dwell + 45), true)
        })
        .collect();
    SpaceTimeNetwork::build(&tiny_station(), &trains, &TimeGrid::new(1200, 15, 15)).unwrap()
}

fn random_pool(net: &SpaceTimeNetwork, rng: &mut ChaCha8Rng, density: f64) -> MultiplierPool {
    let mut pool = MultiplierPool::new(net);
    for r in 0..net.resources.len() as u32 {
        if rng.gen_bool(density) {
            pool.set(ResourceId(r), rng.gen_range(0.0..20.0));
        }
    }
    for l in pool.balance.iter_mut() {
        *l = rng.gen_range(0.0..5.0);
    }
    pool
}

fn random_solution(net: &SpaceTimeNetwork, rng: &mut ChaCha8Rng) -> Solution {
    let paths = net
        .blocks
        .iter()
        .map(|b| {
            let mut c: Vec<f64> = (0..b.arcs.len()).map(|_| rng.gen_range(0.0..10.0)).collect();
            c[0] = if rng.gen_bool(0.15) { 0.0 } else { 1e9 };
            solve_block(b, &c, rng).path
        })
        .collect();
    Solution { paths }
}

fn path_total(costs: &[f64], p: &TrainPath) -> f64 {
    match p {
        TrainPath::Cancelled => costs[0],
        TrainPath::Scheduled(a) => path_cost(costs, a),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn aggregated_costs_reproduce_the_lagrangian(seed in any::<u64>(), cap in proptest::option::of(0u32..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = virtual_instance(seed % 500, 4);
        let net = inst.network().unwrap();
        let raw = net.raw_costs(&inst.weights);
        let mut pool = random_pool(&net, &mut rng, 0.05);
        if cap.is_none() {
            pool.balance.iter_mut().for_each(|l| *l = 0.0);
        }
        let sol = random_solution(&net, &mut rng);
        let agg = aggregated_costs(&net, &raw, &pool, None);
        let via_costs: f64 = sol.paths.iter().zip(&agg).map(|(p, c)| path_total(c, p)).sum();
        let via_costs = lower_bound(&[via_costs], &pool, cap);
        let direct = lagrangian_value(&net, &sol, &inst.weights, &pool, cap);
        prop_assert!((via_costs - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn lower_bound_never_exceeds_the_optimum(seed in any::<u64>(), balanced in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = tiny_net(seed, 3);
        let w = Weights::default();
        let cap = balanced.then_some(1);
        let exact = solve_exact(&net, &w, cap, &ExactLimits::default()).unwrap();
        let raw = net.raw_costs(&w);
        let mut pool = random_pool(&net, &mut rng, 0.2);
        if cap.is_none() {
            pool.balance.iter_mut().for_each(|l| *l = 0.0);
        }
        let agg = aggregated_costs(&net, &raw, &pool, None);
        let z: Vec<f64> = net.blocks.iter().zip(&agg).map(|(b, c)| solve_block(b, c, &mut rng).cost).collect();
        prop_assert!(lower_bound(&z, &pool, cap) <= exact.optimum + 1e-6);
    }

    #[test]
    fn dense_and_dynamic_pools_agree(seed in 0u64..1000) {
        let inst = virtual_instance(seed, 6);
        let net = inst.network().unwrap();
        let params = |s| LrParams { max_iterations: 40, seed, pool_strategy: s, ..Default::default() };
        let mut dense = LagrangianSolver::new(&net, &inst.weights, params(PoolStrategy::Dense));
        let mut dynamic = LagrangianSolver::new(&net, &inst.weights, params(PoolStrategy::Dynamic));
        loop {
            let a = dense.iterate();
            let b = dynamic.iterate();
            prop_assert_eq!(a.record.lb.to_bits(), b.record.lb.to_bits());
            prop_assert_eq!(dense.pool().dense(), dynamic.pool().dense());
            prop_assert_eq!(a.relaxed, b.relaxed);
            prop_assert_eq!(a.done, b.done);
            if a.done.is_some() {
                break;
            }
        }
    }
}

#[test]
fn route_pool_pricing_matches_full_scan() {
    for seed in 0..6 {
        let inst = virtual_instance(seed, 8);
        let net = inst.network().unwrap();
        let params = LrParams { max_iterations: 60, seed, ..Default::default() };
        let mut s = LagrangianSolver::new(&net, &inst.weights, params);
        loop {
            let done = s.iterate().done;
            let full = aggregated_costs(&net, s.raw_costs(), s.pool(), None);
            let pooled = aggregated_costs(&net, s.raw_costs(), s.pool(), s.route_pool());
            assert_eq!(full, pooled);
            if done.is_some() {
                break;
            }
        }
    }
}

#[test]
fn bounds_are_monotone_and_upper_bounds_feasible() {
    for seed in 0..8 {
        let inst = virtual_instance(seed, 7);
        let net = inst.network().unwrap();
        let params = LrParams { max_iterations: 150, seed, ..Default::default() };
        let mut s = LagrangianSolver::new(&net, &inst.weights, params);
        let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
        loop {
            let out = s.iterate();
            assert!(out.record.lb_best >= lb && out.record.ub_best <= ub);
            (lb, ub) = (out.record.lb_best, out.record.ub_best);
            assert!(lb <= ub + 1e-9);
            if let Some((sol, v)) = &out.upper {
                assert!(check_feasibility(&net, sol, None).unwrap().is_feasible());
                let obj = platforming::objective_value(&net, sol, &inst.weights);
                assert!((obj - v).abs() < 1e-6);
            }
            if out.done.is_some() {
                break;
            }
        }
    }
}

#[test]
fn final_policy_keeps_the_lower_bound_trajectory() {
    for seed in 0..5 {
        let inst = virtual_instance(seed, 8);
        let net = inst.network().unwrap();
        let run = |ub_policy| {
            let p = LrParams { max_iterations: 80, seed, ub_policy, gap_tolerance: 0.0, integer_valued: Some(false), ..Default::default() };
            platforming::lr::run(&net, &inst.weights, p)
        };
        let it = run(UbPolicy::Iterative);
        let fin = run(UbPolicy::Final);
        let n = it.bounds.iterations.len().min(fin.bounds.iterations.len());
        for m in 0..n {
            assert_eq!(it.bounds.iterations[m].lb.to_bits(), fin.bounds.iterations[m].lb.to_bits());
        }
        let sol = fin.solution.expect("final heuristic yields a plan");
        assert!(check_feasibility(&net, &sol, None).unwrap().is_feasible());
    }
}

#[test]
fn single_train_terminates_immediately() {
    let net = tiny_net(3, 1);
    let out = platforming::lr::run(&net, &Weights::default(), LrParams::default());
    assert_eq!(out.bounds.iterations.len(), 1);
    assert_eq!(out.bounds.termination, Some(Termination::RelaxationFeasible));
    assert_eq!(out.bounds.ub_best, out.bounds.lb_best);
    let exact = solve_exact(&net, &Weights::default(), None, &ExactLimits::default()).unwrap();
    assert!((exact.optimum - out.bounds.ub_best).abs() < 1e-9);
}

fn occupancy(net: &SpaceTimeNetwork, counts: &[(u32, u32)]) -> Occupancy {
    let mut c = vec![0; net.resources.len()];
    for &(r, n) in counts {
        c[r as usize] = n;
    }
    Occupancy {
        occupied: counts.iter().filter(|x| x.1 > 0).map(|x| x.0).collect(),
        counts: c,
        sidings: vec![0; net.index.sidings()],
    }
}

#[test]
fn subgradient_step_examples() {
    let net = tiny_net(1, 2);
    for dynamic in [false, true] {
        let step = |pool: &mut MultiplierPool, occ: &Occupancy, a: f64| {
            if dynamic {
                dynamic_pool_update(pool, occ, a, None, None);
            } else {
                subgradient_update(pool, occ, a, None);
            }
        };
        let r = ResourceId(5);
        let mut pool = MultiplierPool::new(&net);
        step(&mut pool, &occupancy(&net, &[(5, 3)]), 1.0);
        assert_eq!(pool.get(r), 2.0);
        pool.set(r, 0.5);
        step(&mut pool, &occupancy(&net, &[]), 0.25);
        assert_eq!(pool.get(r), 0.25);
        pool.set(r, 0.1);
        step(&mut pool, &occupancy(&net, &[]), 0.5);
        assert_eq!(pool.get(r), 0.0);
        assert!(pool.is_empty());
    }
}

#[test]
fn pool_admits_violated_switch_group_and_its_route_arcs() {
    let inst = virtual_instance(2, 6);
    let net = inst.network().unwrap();
    // A switch-group resource that several arcs link to.
    let (f0, g0) = (0, net.blocks[0].arcs_of_kind(platforming::ArcKind::Arrival).next().unwrap());
    let r = net.blocks[f0].sg_links(g0)[0];
    let mut pool = MultiplierPool::new(&net);
    let mut rp = RouteArcPool::new(&net);
    let entered = dynamic_pool_update(&mut pool, &occupancy(&net, &[(r.0, 2)]), 1.0, None, Some((&mut rp, &net)));
    assert_eq!(entered, vec![r]);
    assert_eq!(pool.entries(), vec![(r, 1.0)]);
    let mut expected = 0;
    for (f, b) in net.blocks.iter().enumerate() {
        for g in 0..b.arcs.len() as u32 {
            let linked = b.sg_links(g).contains(&r);
            assert_eq!(rp.contains(f, g), linked, "train {f} arc {g}");
            expected += linked as usize;
        }
    }
    assert_eq!(rp.len(), expected);
}
