//! Turning an undirected edge set into a rooted multicast tree.

use std::collections::{BTreeMap, VecDeque};

use crate::graph::{EdgeId, Instance, NodeId};
use crate::solution::{Arc, FlowSolution};

/// Roots the component of `edges` containing the source, drops branches that
/// serve no terminal, and gives every remaining edge the largest demand found
/// below it. Extra edges that would close a cycle are ignored (first reached
/// wins in BFS order). Returns `None` if some terminal is not reached.
pub fn tree_solution(inst: &Instance, edges: &[EdgeId], algorithm: &str) -> Option<FlowSolution> {
    let n = inst.graph.node_count();
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &id in edges {
        let e = inst.graph.edge(id);
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::new();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([inst.source]);
    seen[inst.source] = true;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    if inst.terminals.keys().any(|&t| !seen[t]) {
        return None;
    }
    Some(rooted_solution(inst, &parent, &order, algorithm))
}

/// Max-demand-below flows on a rooted tree given by `parent` pointers, visiting nodes in
/// `order` (parents before children). Subtrees without terminals are pruned.
pub(crate) fn rooted_solution(
    inst: &Instance,
    parent: &[NodeId],
    order: &[NodeId],
    algorithm: &str,
) -> FlowSolution {
    let n = inst.graph.node_count();
    let mut below = vec![0.0f64; n];
    for &x in order.iter().rev() {
        if let Some(d) = inst.demand(x) {
            below[x] = below[x].max(d);
        }
        let p = parent[x];
        if p != usize::MAX {
            below[p] = below[p].max(below[x]);
        }
    }
    let flows: BTreeMap<Arc, f64> = order
        .iter()
        .filter(|&&x| parent[x] != usize::MAX && below[x] > 0.0)
        .map(|&x| ((parent[x], x), below[x]))
        .collect();
    FlowSolution::new(inst, flows, algorithm).expect("tree arcs are graph edges")
}

/// Extracts a tree from a feasible directed flow network without raising any
/// edge's cost: terminals are attached in decreasing demand order, each by a
/// shortest-hop path over arcs whose flow already covers that demand.
pub fn extract_tree(inst: &Instance, flows: &BTreeMap<Arc, f64>, algorithm: &str) -> Option<FlowSolution> {
    let n = inst.graph.node_count();
    let mut out: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &f) in flows {
        if a < n && b < n {
            out[a].push((b, f));
        }
    }
    let mut terms: Vec<(NodeId, f64)> = inst.terminals.iter().map(|(&t, &x)| (t, x)).collect();
    terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut parent = vec![usize::MAX; n];
    let mut in_tree = vec![false; n];
    in_tree[inst.source] = true;
    for (t, x) in terms {
        if in_tree[t] {
            continue;
        }
        let mut prev = vec![usize::MAX; n];
        let mut seen = in_tree.clone();
        let mut queue: VecDeque<NodeId> = (0..n).filter(|&v| in_tree[v]).collect();
        while let Some(a) = queue.pop_front() {
            if a == t {
                break;
            }
            for &(b, f) in &out[a] {
                if !seen[b] && f >= x - crate::TOL {
                    seen[b] = true;
                    prev[b] = a;
                    queue.push_back(b);
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut cur = t;
        while !in_tree[cur] {
            parent[cur] = prev[cur];
            in_tree[cur] = true;
            cur = prev[cur];
        }
    }
    // parents-before-children order
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for v in 0..n {
        if parent[v] != usize::MAX {
            children[parent[v]].push(v);
        }
    }
    let mut order = vec![inst.source];
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        order.extend_from_slice(&children[x]);
        i += 1;
    }
    Some(rooted_solution(inst, &parent, &order, algorithm))
}

/// Whether the undirected support of `flows` is acyclic, connected, and every
/// arc points away from the source.
pub fn is_rooted_tree(inst: &Instance, flows: &BTreeMap<Arc, f64>) -> bool {
    let n = inst.graph.node_count();
    let mut indeg = vec![0usize; n];
    let mut touched = vec![false; n];
    for &(a, b) in flows.keys() {
        indeg[b] += 1;
        touched[a] = true;
        touched[b] = true;
    }
    if indeg[inst.source] != 0 || indeg.iter().any(|&d| d > 1) {
        return false;
    }
    let nodes = touched.iter().filter(|&&t| t).count();
    if flows.is_empty() {
        return true;
    }
    // in-degree ≤ 1 with a single root and |E| = |V| − 1 means an arborescence
    // iff everything is reachable from the source.
    if flows.len() + 1 != nodes {
        return false;
    }
    let mut out: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(a, b) in flows.keys() {
        out[a].push(b);
    }
    let mut seen = 0;
    let mut stack = vec![inst.source];
    while let Some(x) = stack.pop() {
        seen += 1;
        stack.extend_from_slice(&out[x]);
    }
    seen == nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::w1;

    #[test]
    fn w1_full_edge_set() {
        let inst = w1();
        // MST-like set {(1,2),(1,3),(0,3)}
        let ids: Vec<_> = [(1, 2), (1, 3), (0, 3)]
            .iter()
            .map(|&(a, b)| inst.graph.edge_between(a, b).unwrap())
            .collect();
        let sol = tree_solution(&inst, &ids, "t").unwrap();
        assert_eq!(
            sol.flows,
            BTreeMap::from([((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)])
        );
        assert!((sol.cost - 0.35).abs() < 1e-12);
        assert!(is_rooted_tree(&inst, &sol.flows));
    }

    #[test]
    fn spur_is_pruned() {
        let inst = w1();
        let all: Vec<_> = (0..inst.graph.edge_count()).collect();
        let sol = tree_solution(&inst, &all, "t").unwrap();
        // BFS from 0 reaches 1 and 3 directly, then 2 via 1.
        assert_eq!(
            sol.flows,
            BTreeMap::from([((0, 1), 0.25), ((0, 3), 1.0), ((1, 2), 0.25)])
        );
    }

    #[test]
    fn extract_from_cyclic_network() {
        let inst = w1();
        let flows = BTreeMap::from([((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25), ((0, 1), 0.25)]);
        assert!(!is_rooted_tree(&inst, &flows));
        let sol = extract_tree(&inst, &flows, "t").unwrap();
        assert!(is_rooted_tree(&inst, &sol.flows));
        assert!(sol.cost <= crate::solution::total_cost(&inst, &flows).unwrap());
    }
}
