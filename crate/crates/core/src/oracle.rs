//! Exhaustive reference optimum for small instances.
//!
//! Enumerates every edge subset that forms a tree over the source and all
//! terminals whose leaves are all required nodes, prices each tree with the
//! largest demand below every edge, and keeps the cheapest. Deliberately
//! shares no code with the dynamic program or the tree helpers.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{validate_instance, Instance, NodeId};
use crate::solution::FlowSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_edges: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 10,
            max_edges: 20,
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    edges: Vec<(NodeId, NodeId, f64)>,
    required: Vec<bool>,
    min_demand: f64,
    // union-find with rollback
    uf_parent: Vec<usize>,
    uf_size: Vec<usize>,
    history: Vec<Option<(usize, usize)>>,
    chosen: Vec<usize>,
    chosen_weight: f64,
    best: Option<(f64, Vec<usize>)>,
}

impl<'a> Search<'a> {
    fn find(&self, mut x: usize) -> usize {
        while self.uf_parent[x] != x {
            x = self.uf_parent[x];
        }
        x
    }

    /// Returns false (and records nothing) if the edge would close a cycle.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.uf_size[ra] >= self.uf_size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.uf_parent[small] = big;
        self.uf_size[big] += self.uf_size[small];
        self.history.push(Some((big, small)));
        true
    }

    fn rollback(&mut self) {
        if let Some(Some((big, small))) = self.history.pop() {
            self.uf_parent[small] = small;
            self.uf_size[big] -= self.uf_size[small];
        }
    }

    /// Can the required nodes still be joined using chosen edges plus the
    /// undecided ones from `next` on?
    fn still_connectable(&self, next: usize) -> bool {
        let n = self.inst.graph.node_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &i in self.chosen.iter() {
            let (a, b, _) = self.edges[i];
            adj[a].push(b);
            adj[b].push(a);
        }
        for &(a, b, _) in &self.edges[next..] {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.inst.source]);
        seen[self.inst.source] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..n).all(|v| !self.required[v] || seen[v])
    }

    fn run(&mut self, i: usize) {
        if let Some((best, _)) = &self.best {
            // every edge of an admissible tree carries at least the smallest demand
            if self.chosen_weight * self.min_demand > best + 1e-12 {
                return;
            }
        }
        if i == self.edges.len() {
            self.evaluate();
            return;
        }
        let (a, b, w) = self.edges[i];
        if self.union(a, b) {
            self.chosen.push(i);
            self.chosen_weight += w;
            self.run(i + 1);
            self.chosen_weight -= w;
            self.chosen.pop();
            self.rollback();
        }
        if self.still_connectable(i + 1) {
            self.run(i + 1);
        }
    }

    fn evaluate(&mut self) {
        let n = self.inst.graph.node_count();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut degree = vec![0usize; n];
        for &i in &self.chosen {
            let (a, b, w) = self.edges[i];
            adj[a].push((b, w));
            adj[b].push((a, w));
            degree[a] += 1;
            degree[b] += 1;
        }
        for v in 0..n {
            if degree[v] == 1 && !self.required[v] {
                return;
            }
            if self.required[v] && degree[v] == 0 {
                return;
            }
        }
        // acyclic, so connected iff |V(T)| = |E(T)| + 1
        let touched = degree.iter().filter(|&&d| d > 0).count();
        if touched != self.chosen.len() + 1 {
            return;
        }
        let (parent, order) = bfs_tree(&adj, self.inst.source);
        let mut below = vec![0.0f64; n];
        for &x in order.iter().rev() {
            if let Some(d) = self.inst.demand(x) {
                below[x] = below[x].max(d);
            }
            if let Some((p, _)) = parent[x] {
                below[p] = below[p].max(below[x]);
            }
        }
        let cost: f64 = order
            .iter()
            .filter_map(|&x| parent[x].map(|(_, w)| w * below[x]))
            .sum();
        let better = match &self.best {
            None => true,
            Some((b, edges)) => {
                cost < *b - 1e-12 || ((cost - *b).abs() <= 1e-12 && self.chosen < *edges)
            }
        };
        if better {
            self.best = Some((cost, self.chosen.clone()));
        }
    }
}

fn bfs_tree(adj: &[Vec<(usize, f64)>], root: usize) -> (Vec<Option<(usize, f64)>>, Vec<usize>) {
    let n = adj.len();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &(y, w) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, w));
                queue.push_back(y);
            }
        }
    }
    (parent, order)
}

/// Exact optimum by exhaustive tree enumeration. Ties go to the
/// lexicographically smallest sorted edge list.
pub fn brute_force_optimum(inst: &Instance, lim: OracleLimits) -> Result<FlowSolution> {
    let n = inst.graph.node_count();
    let m = inst.graph.edge_count();
    if n > lim.max_nodes || m > lim.max_edges {
        return Err(Error::OracleLimit(format!(
            "{n} nodes / {m} edges exceed {} / {}",
            lim.max_nodes, lim.max_edges
        )));
    }
    let report = validate_instance(inst);
    if !report.is_empty() {
        return Err(Error::Infeasible(report));
    }
    let start = std::time::Instant::now();
    let mut required = vec![false; n];
    for v in inst.required_nodes() {
        required[v] = true;
    }
    let mut search = Search {
        inst,
        edges: inst.graph.edges().iter().map(|e| (e.u, e.v, e.weight)).collect(),
        required,
        min_demand: inst.terminals.values().copied().fold(f64::INFINITY, f64::min),
        uf_parent: (0..n).collect(),
        uf_size: vec![1; n],
        history: Vec::new(),
        chosen: Vec::new(),
        chosen_weight: 0.0,
        best: None,
    };
    search.run(0);
    let (_, chosen) = search.best.expect("a reachable instance has a tree");

    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &i in &chosen {
        let (a, b, w) = search.edges[i];
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let (parent, order) = bfs_tree(&adj, inst.source);
    let mut below = vec![0.0f64; n];
    for &x in order.iter().rev() {
        if let Some(d) = inst.demand(x) {
            below[x] = below[x].max(d);
        }
        if let Some((p, _)) = parent[x] {
            below[p] = below[p].max(below[x]);
        }
    }
    let flows: BTreeMap<_, _> = order
        .iter()
        .filter_map(|&x| parent[x].map(|(p, _)| ((p, x), below[x])))
        .collect();
    let mut sol = FlowSolution::new(inst, flows, "oracle")?;
    sol.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(sol)
}

/// Classic Steiner tree weight over the source and terminals (every edge at
/// unit rate).
pub fn steiner_tree_cost(inst: &Instance, lim: OracleLimits) -> Result<f64> {
    let unit = inst.with_demands(|_, _| 1.0)?;
    Ok(brute_force_optimum(&unit, lim)?.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, w1};
    use crate::graph::Graph;

    #[test]
    fn w1_by_enumeration() {
        let sol = brute_force_optimum(&w1(), OracleLimits::default()).unwrap();
        assert!((sol.cost - 0.35).abs() < 1e-12);
        assert_eq!(sol.edge_set(), vec![(0, 3), (1, 2), (1, 3)]);
        assert_eq!(
            sol.flows,
            BTreeMap::from([((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)])
        );
    }

    #[test]
    fn chain_unique_path() {
        let sol = brute_force_optimum(&chain(0.5), OracleLimits::default()).unwrap();
        assert!((sol.cost - 0.5).abs() < 1e-12);
    }

    #[test]
    fn forced_single_edge() {
        let g = Graph::new(4, [(0, 1, 0.7), (1, 2, 0.1), (2, 3, 0.1), (1, 3, 0.2)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(1, 0.5)])).unwrap();
        let sol = brute_force_optimum(&inst, OracleLimits::default()).unwrap();
        assert_eq!(sol.flows, BTreeMap::from([((0, 1), 0.5)]));
    }

    #[test]
    fn limits_enforced() {
        let inst = crate::generate::generate_instance(&crate::generate::GenConfig {
            node_count: 12,
            avg_degree: 3.0,
            terminal_count: 2,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            brute_force_optimum(&inst, OracleLimits::default()),
            Err(Error::OracleLimit(_))
        ));
    }

    #[test]
    fn ties_prefer_smallest_edge_list() {
        // square 0-1-3, 0-2-3 with equal weights: both paths cost the same
        let g = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(3, 1.0)])).unwrap();
        let sol = brute_force_optimum(&inst, OracleLimits::default()).unwrap();
        assert_eq!(sol.edge_set(), vec![(0, 1), (1, 3)]);
    }
}
