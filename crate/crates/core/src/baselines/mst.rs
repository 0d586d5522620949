use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Instance, NodeId};
use crate::solution::FlowSolution;

pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over the edges accepted by `keep`, ties by endpoint pair.
pub(crate) fn kruskal(graph: &Graph, keep: impl Fn(EdgeId) -> bool) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = (0..graph.edge_count()).filter(|&i| keep(i)).collect();
    ids.sort_by(|&a, &b| {
        let (ea, eb) = (graph.edge(a), graph.edge(b));
        ea.weight.total_cmp(&eb.weight).then((ea.u, ea.v).cmp(&(eb.u, eb.v)))
    });
    let mut ds = DisjointSet::new(graph.node_count());
    ids.into_iter()
        .filter(|&i| {
            let e = graph.edge(i);
            ds.union(e.u, e.v)
        })
        .collect()
}

/// Repeatedly strips leaves that are neither source nor terminal.
pub(crate) fn prune_leaves(inst: &Instance, edges: &[EdgeId]) -> Vec<EdgeId> {
    let n = inst.graph.node_count();
    let mut alive = vec![true; edges.len()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut degree = vec![0usize; n];
    for (k, &id) in edges.iter().enumerate() {
        let e = inst.graph.edge(id);
        incident[e.u].push(k);
        incident[e.v].push(k);
        degree[e.u] += 1;
        degree[e.v] += 1;
    }
    let mut queue: VecDeque<NodeId> = (0..n)
        .filter(|&v| degree[v] == 1 && !inst.is_required(v))
        .collect();
    while let Some(v) = queue.pop_front() {
        if degree[v] != 1 {
            continue;
        }
        let k = *incident[v].iter().find(|&&k| alive[k]).expect("leaf has an edge");
        alive[k] = false;
        degree[v] = 0;
        let other = inst.graph.edge(edges[k]).other(v);
        degree[other] -= 1;
        if degree[other] == 1 && !inst.is_required(other) {
            queue.push_back(other);
        }
    }
    edges
        .iter()
        .zip(alive)
        .filter_map(|(&id, a)| a.then_some(id))
        .collect()
}

/// Minimum spanning tree, pruned to the required nodes, with every edge
/// carrying the largest demand of all terminals.
pub fn solve_mst_prune(inst: &Instance) -> Result<FlowSolution> {
    if !inst.graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let tree = prune_leaves(inst, &kruskal(&inst.graph, |_| true));
    let n = inst.graph.node_count();
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &id in &tree {
        let e = inst.graph.edge(id);
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let x = inst.max_demand();
    let mut flows = BTreeMap::new();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([inst.source]);
    seen[inst.source] = true;
    while let Some(a) = queue.pop_front() {
        for &b in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                flows.insert((a, b), x);
                queue.push_back(b);
            }
        }
    }
    FlowSolution::new(inst, flows, "mst")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, w1};

    #[test]
    fn w1_uses_max_demand_everywhere() {
        let sol = solve_mst_prune(&w1()).unwrap();
        assert_eq!(sol.edge_set(), vec![(0, 3), (1, 2), (1, 3)]);
        assert!(sol.flows.values().all(|&f| f == 1.0));
        assert!((sol.cost - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chain_is_the_path() {
        let sol = solve_mst_prune(&chain(0.5)).unwrap();
        assert_eq!(sol.flows, BTreeMap::from([((0, 1), 0.5), ((1, 2), 0.5)]));
    }

    #[test]
    fn spur_pruned() {
        // star centred at 1 with an unused spur 1-4
        let g = Graph::new(5, [(0, 1, 0.1), (1, 2, 0.1), (1, 3, 0.1), (1, 4, 0.1)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(2, 1.0), (3, 0.5)])).unwrap();
        let sol = solve_mst_prune(&inst).unwrap();
        assert_eq!(sol.edge_set(), vec![(0, 1), (1, 2), (1, 3)]);
        assert!((sol.cost - 0.3).abs() < 1e-12);
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::new(4, [(0, 1, 0.1), (2, 3, 0.1)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(1, 1.0)])).unwrap();
        assert!(matches!(solve_mst_prune(&inst), Err(Error::Disconnected)));
    }
}
