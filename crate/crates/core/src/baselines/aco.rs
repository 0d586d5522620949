use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{validate_instance, Instance, NodeId};
use crate::solution::FlowSolution;

use super::{merge_paths, MetaheuristicParams};

/// Ant colony search over per-terminal paths. Each ant walks from the source
/// to every terminal, choosing the next hop with probability proportional to
/// `pheromone^α · (1/weight)^β` and backing out of dead ends; its paths are
/// merged like the shortest-path union. After each iteration pheromone
/// evaporates and the best network so far reinforces its edges.
pub fn solve_aco(inst: &Instance, p: &MetaheuristicParams) -> Result<FlowSolution> {
    p.check()?;
    let report = validate_instance(inst);
    if !report.is_empty() {
        return Err(Error::Infeasible(report));
    }
    let g = &inst.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut pheromone = vec![1.0f64; g.edge_count()];
    let desirability: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| (1.0 / e.weight.max(1e-9)).powf(p.heuristic_weight))
        .collect();
    let mut best: Option<FlowSolution> = None;

    for _ in 0..p.iterations {
        for _ in 0..p.ant_count {
            let paths: Vec<Vec<NodeId>> = inst
                .terminals
                .keys()
                .map(|&t| walk(inst, t, &pheromone, &desirability, p.pheromone_weight, &mut rng))
                .collect();
            let sol = merge_paths(inst, &paths, "aco")?;
            if best.as_ref().is_none_or(|b| sol.cost < b.cost) {
                best = Some(sol);
            }
        }
        for tau in pheromone.iter_mut() {
            *tau *= 1.0 - p.evaporation;
        }
        let b = best.as_ref().expect("at least one ant ran");
        let deposit = 1.0 / b.cost.max(1e-9);
        for &(a, c) in b.flows.keys() {
            let id = g.edge_between(a, c).expect("solution arcs are edges");
            pheromone[id] += deposit;
        }
    }
    Ok(best.expect("iterations is positive"))
}

/// Randomised depth-first walk from the source to `target` that never revisits
/// a node. Always succeeds on a connected component.
fn walk(
    inst: &Instance,
    target: NodeId,
    pheromone: &[f64],
    desirability: &[f64],
    alpha: f64,
    rng: &mut impl Rng,
) -> Vec<NodeId> {
    let g = &inst.graph;
    let mut visited = vec![false; g.node_count()];
    let mut path = vec![inst.source];
    visited[inst.source] = true;
    while let Some(&x) = path.last() {
        if x == target {
            return path;
        }
        let options: Vec<(NodeId, f64)> = g
            .neighbors(x)
            .iter()
            .filter(|(y, _)| !visited[*y])
            .map(|&(y, id)| (y, pheromone[id].powf(alpha) * desirability[id]))
            .collect();
        if options.is_empty() {
            path.pop();
            continue;
        }
        let next = match WeightedIndex::new(options.iter().map(|o| o.1)) {
            Ok(dist) => options[dist.sample(rng)].0,
            Err(_) => options[rng.gen_range(0..options.len())].0,
        };
        visited[next] = true;
        path.push(next);
    }
    unreachable!("target is reachable from the source")
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::fixtures::w1;
    use crate::graph::Graph;

    #[test]
    fn w1_within_mst_cost() {
        let sol = solve_aco(&w1(), &MetaheuristicParams::default()).unwrap();
        assert!(sol.cost <= 0.5 + 1e-12);
    }

    #[test]
    fn greedy_limit_finds_shortest_path() {
        // 0-1-3 is cheap, 0-2-3 is expensive
        let g = Graph::new(4, [(0, 1, 0.1), (1, 3, 0.1), (0, 2, 0.9), (2, 3, 0.9)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(3, 1.0)])).unwrap();
        let p = MetaheuristicParams {
            heuristic_weight: 8.0,
            iterations: 10,
            ..Default::default()
        };
        let sol = solve_aco(&inst, &p).unwrap();
        assert_eq!(sol.edge_set(), vec![(0, 1), (1, 3)]);
    }

    #[test]
    fn reproducible() {
        let inst = crate::generate::generate_instance(&crate::GenConfig {
            node_count: 30,
            terminal_count: 5,
            seed: 6,
            ..Default::default()
        })
        .unwrap();
        let p = MetaheuristicParams {
            seed: 1,
            iterations: 10,
            ..Default::default()
        };
        assert_eq!(solve_aco(&inst, &p).unwrap(), solve_aco(&inst, &p).unwrap());
    }
}
