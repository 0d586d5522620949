use crate::graph::{Instance, NodeId};
use crate::solution::FlowSolution;
use crate::tree::tree_solution;

use super::mst::kruskal;

/// Genotype decoder shared by the node-subset metaheuristics: spanning tree
/// of the subgraph induced by `selected` (required nodes are always
/// included), pruned to what the terminals need. `None` when the induced
/// subgraph does not connect the source to every terminal.
pub fn decode_node_subset(inst: &Instance, selected: &[bool]) -> Option<FlowSolution> {
    let g = &inst.graph;
    let keep = |v: NodeId| inst.is_required(v) || selected.get(v).copied().unwrap_or(false);
    let tree = kruskal(g, |id| {
        let e = g.edge(id);
        keep(e.u) && keep(e.v)
    });
    tree_solution(inst, &tree, "decode")
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::fixtures::w1;
    use crate::graph::Graph;

    #[test]
    fn w1_all_nodes() {
        let inst = w1();
        let sol = decode_node_subset(&inst, &[true; 4]).unwrap();
        assert_eq!(
            sol.flows,
            BTreeMap::from([((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)])
        );
        assert!((sol.cost - 0.35).abs() < 1e-12);
    }

    #[test]
    fn required_only_disconnected() {
        assert!(decode_node_subset(&w1(), &[false; 4]).is_none());
    }

    #[test]
    fn path_instance() {
        let g = Graph::new(4, [(0, 1, 0.2), (1, 2, 0.3), (2, 3, 0.4)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(3, 0.5)])).unwrap();
        let sol = decode_node_subset(&inst, &[true; 4]).unwrap();
        assert_eq!(sol.edge_set(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!((sol.cost - 0.45).abs() < 1e-12);
    }
}
