use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::graph::{validate_instance, EdgeId, Graph, Instance, NodeId};
use crate::solution::FlowSolution;
use crate::tree::tree_solution;

#[derive(PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn path_to(parent: &[Option<NodeId>], mut v: NodeId) -> Vec<NodeId> {
    let mut p = vec![v];
    while let Some(u) = parent[v] {
        p.push(u);
        v = u;
    }
    p.reverse();
    p
}

/// Single-source shortest paths. Among equally short paths the
/// lexicographically smallest node sequence wins. Returns distances and
/// predecessor links.
pub fn shortest_path(graph: &Graph, source: NodeId) -> (Vec<f64>, Vec<Option<NodeId>>) {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::from([Entry(0.0, source)]);
    dist[source] = 0.0;
    while let Some(Entry(d, v)) = heap.pop() {
        if done[v] || d > dist[v] {
            continue;
        }
        done[v] = true;
        for &(u, eid) in graph.neighbors(v) {
            if done[u] {
                continue;
            }
            let cand = d + graph.edge(eid).weight;
            if cand < dist[u] {
                dist[u] = cand;
                parent[u] = Some(v);
                heap.push(Entry(cand, u));
            } else if cand == dist[u] && parent[u] != Some(v) {
                let mut via = path_to(&parent, v);
                via.push(u);
                if via < path_to(&parent, u) {
                    parent[u] = Some(v);
                }
            }
        }
    }
    (dist, parent)
}

/// Union of one source→terminal shortest path per terminal. Shared edges
/// carry one stream at the largest demand routed over them.
pub fn solve_sp_union(inst: &Instance) -> Result<FlowSolution> {
    let report = validate_instance(inst);
    if !report.is_empty() {
        return Err(Error::Infeasible(report));
    }
    let (_, parent) = shortest_path(&inst.graph, inst.source);
    let paths: Vec<Vec<NodeId>> = inst.terminals.keys().map(|&t| path_to(&parent, t)).collect();
    merge_paths(inst, &paths, "spt")
}

/// Merges source→terminal node paths into one tree. Cycles in the union are
/// broken one at a time by dropping the cycle edge whose removal leaves the
/// cheapest network that still reaches every terminal.
pub fn merge_paths(inst: &Instance, paths: &[Vec<NodeId>], algorithm: &str) -> Result<FlowSolution> {
    let mut support: BTreeSet<EdgeId> = BTreeSet::new();
    for p in paths {
        for w in p.windows(2) {
            let id = inst
                .graph
                .edge_between(w[0], w[1])
                .ok_or(Error::NonEdge { from: w[0], to: w[1] })?;
            support.insert(id);
        }
    }
    let mut edges: Vec<EdgeId> = support.into_iter().collect();
    while let Some(cycle) = find_cycle(&inst.graph, &edges) {
        let mut best: Option<(f64, EdgeId)> = None;
        for &drop in &cycle {
            let rest: Vec<EdgeId> = edges.iter().copied().filter(|&e| e != drop).collect();
            if let Some(sol) = tree_solution(inst, &rest, algorithm) {
                if best.is_none_or(|(c, _)| sol.cost < c) {
                    best = Some((sol.cost, drop));
                }
            }
        }
        let (_, drop) = best.expect("removing a cycle edge keeps connectivity");
        edges.retain(|&e| e != drop);
    }
    tree_solution(inst, &edges, algorithm).ok_or_else(|| {
        Error::Infeasible(
            inst.terminals
                .keys()
                .map(|&t| crate::graph::InstanceViolation::UnreachableTerminal(t))
                .collect(),
        )
    })
}

/// Edge ids of some cycle in the undirected edge set, if any.
fn find_cycle(graph: &Graph, edges: &[EdgeId]) -> Option<Vec<EdgeId>> {
    let n = graph.node_count();
    let mut adj: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); n];
    for &id in edges {
        let e = graph.edge(id);
        adj[e.u].push((e.v, id));
        adj[e.v].push((e.u, id));
    }
    let mut parent: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    for root in 0..n {
        if depth[root] != usize::MAX || adj[root].is_empty() {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &(y, id) in &adj[x] {
                if parent[x].map(|(_, pe)| pe) == Some(id) {
                    continue;
                }
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some((x, id));
                    stack.push(y);
                } else {
                    // close the cycle x … lca … y
                    let mut cycle = vec![id];
                    let (mut a, mut b) = (x, y);
                    while a != b {
                        if depth[a] >= depth[b] {
                            let (p, pe) = parent[a].expect("non-root");
                            cycle.push(pe);
                            a = p;
                        } else {
                            let (p, pe) = parent[b].expect("non-root");
                            cycle.push(pe);
                            b = p;
                        }
                    }
                    return Some(cycle);
                }
            }
        }
    }
    None
}
