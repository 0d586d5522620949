use proptest::prelude::*;

use ost_core::baselines::{Algorithm, MetaheuristicParams};
use ost_core::dp::{reconstruct, solve_table};
use ost_core::generate::{generate_instance, GenConfig};
use ost_core::graph::{parse_instance, serialize_instance, Instance};
use ost_core::oracle::{brute_force_optimum, OracleLimits};
use ost_core::solution::{parse_solution, serialize_solution};
use ost_core::validate::{check_all, check_constraints};
use ost_core::solve_ost;

const TOL: f64 = 1e-9;

fn small_params(seed: u64) -> MetaheuristicParams {
    MetaheuristicParams {
        population: 16,
        iterations: 15,
        ant_count: 8,
        seed,
        ..Default::default()
    }
}

prop_compose! {
    fn gen_config_with_degree(max_nodes: usize, max_terminals: usize, max_degree: f64)
        (n in 5..=max_nodes)
        (n in Just(n),
         d in 2.0f64..(n as f64 - 1.0).min(max_degree),
         k in 1..=max_terminals.min(n - 1),
         seed in any::<u64>())
        -> GenConfig {
        GenConfig { node_count: n, avg_degree: d, terminal_count: k, seed, ..GenConfig::default() }
    }
}

fn gen_config(max_nodes: usize, max_terminals: usize) -> impl Strategy<Value = GenConfig> {
    gen_config_with_degree(max_nodes, max_terminals, 5.0)
}

fn instance(max_nodes: usize, max_terminals: usize) -> impl Strategy<Value = Instance> {
    gen_config(max_nodes, max_terminals).prop_map(|c| generate_instance(&c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_graphs_are_connected_with_requested_size(cfg in gen_config(60, 8)) {
        let inst = generate_instance(&cfg).unwrap();
        prop_assert!(inst.graph.is_connected());
        prop_assert_eq!(inst.graph.edge_count(), cfg.edge_count());
        prop_assert_eq!(inst.terminal_count(), cfg.terminal_count);
        prop_assert!(!inst.is_terminal(inst.source));
        for e in inst.graph.edges() {
            prop_assert!(e.weight > 0.0 && e.weight < 1.0);
        }
    }

    #[test]
    fn instance_round_trip(inst in instance(30, 6)) {
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(serialize_instance(&back), text);
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn solution_round_trip(inst in instance(20, 4)) {
        let sol = solve_ost(&inst).unwrap();
        let text = serialize_solution(&sol);
        let back = parse_solution(&text).unwrap();
        prop_assert_eq!(serialize_solution(&back), text);
        prop_assert_eq!(back.flows, sol.flows);
    }

    #[test]
    fn dp_cost_grows_with_subset(inst in instance(15, 5)) {
        let table = solve_table(&inst).unwrap();
        let full = table.full_mask();
        for v in 0..inst.graph.node_count() {
            for s in 1..=full {
                let mut sub = s;
                while sub > 0 {
                    prop_assert!(table.cost(v, sub) <= table.cost(v, s) + TOL);
                    sub = (sub - 1) & s;
                }
            }
        }
    }

    #[test]
    fn reconstruction_matches_table(inst in instance(15, 5)) {
        let table = solve_table(&inst).unwrap();
        let full = table.full_mask();
        for v in 0..inst.graph.node_count() {
            for s in 1..=full {
                let sol = reconstruct(&table, &inst, v, s).unwrap();
                prop_assert!((sol.cost - table.cost(v, s)).abs() <= TOL,
                    "state ({}, {:b}): {} vs {}", v, s, sol.cost, table.cost(v, s));
            }
        }
    }

    #[test]
    fn ost_matches_oracle(cfg in gen_config_with_degree(10, 4, 4.0)) {
        let inst = generate_instance(&cfg).unwrap();
        let ost = solve_ost(&inst).unwrap();
        let oracle = brute_force_optimum(&inst, OracleLimits::default()).unwrap();
        prop_assert!((ost.cost - oracle.cost).abs() <= TOL);
        prop_assert!(check_all(&inst, &oracle).is_empty());
        prop_assert!(check_all(&inst, &ost).is_empty());
    }

    #[test]
    fn single_terminal_ost_equals_shortest_path(cfg in gen_config(40, 1)) {
        let inst = generate_instance(&cfg).unwrap();
        let ost = solve_ost(&inst).unwrap();
        let spt = Algorithm::Spt.solve(&inst, &MetaheuristicParams::default()).unwrap();
        prop_assert!((ost.cost - spt.cost).abs() <= TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ost_dominates_feasible_baselines(inst in instance(25, 5), seed in any::<u64>()) {
        let ost = solve_ost(&inst).unwrap();
        let params = small_params(seed);
        for alg in [Algorithm::Mst, Algorithm::Spt, Algorithm::Ga, Algorithm::Aco, Algorithm::Bco] {
            let sol = alg.solve(&inst, &params).unwrap();
            let report = check_constraints(&inst, &sol);
            prop_assert!(report.is_empty(), "{} infeasible:\n{}", alg, report);
            prop_assert!(ost.cost <= sol.cost + TOL, "ost {} > {} {}", ost.cost, alg, sol.cost);
        }
    }
}

#[test]
fn generated_weights_are_uniform() {
    let mut weights = Vec::new();
    let mut seed = 0;
    while weights.len() < 20_000 {
        let inst = generate_instance(&GenConfig { node_count: 200, avg_degree: 6.0, seed, ..GenConfig::default() }).unwrap();
        weights.extend(inst.graph.edges().iter().map(|e| e.weight));
        seed += 1;
    }
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    assert!((mean - 0.5).abs() <= 0.02, "mean weight {mean}");
    assert!(weights.iter().all(|&w| w > 0.0 && w < 1.0));
}
