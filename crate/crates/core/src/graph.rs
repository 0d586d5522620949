//! Undirected weighted topology, multicast instances and their document format.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

/// An undirected link with its unit transmission cost. Endpoints are stored
/// with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected weighted graph. Edges are kept sorted by `(u, v)` so that an
/// edge id is stable for a given edge set regardless of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    index: HashMap<(NodeId, NodeId), EdgeId>,
}

impl Graph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::invariant("nodes", "must be positive"));
        }
        let mut list = Vec::new();
        for (i, (a, b, w)) in edges.into_iter().enumerate() {
            let field = format!("edges[{i}]");
            if a >= node_count || b >= node_count {
                return Err(Error::invariant(field, format!("node id out of range [0, {node_count})")));
            }
            if a == b {
                return Err(Error::invariant(field, "self-loop"));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invariant(field, format!("weight {w} must be finite and nonnegative")));
            }
            list.push(Edge {
                u: a.min(b),
                v: a.max(b),
                weight: w,
            });
        }
        list.sort_by_key(|e| (e.u, e.v));
        let mut index = HashMap::with_capacity(list.len());
        let mut adjacency = vec![Vec::new(); node_count];
        for (id, e) in list.iter().enumerate() {
            if index.insert((e.u, e.v), id).is_some() {
                return Err(Error::invariant(
                    "edges",
                    format!("duplicate edge {{{}, {}}}", e.u, e.v),
                ));
            }
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Graph {
            node_count,
            edges: list,
            adjacency,
            index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Neighbors of `v` with the connecting edge id, sorted by neighbor.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.edge_between(a, b).map(|id| self.edges[id].weight)
    }

    /// Nodes reachable from `start`, as a membership vector.
    pub fn reachable_from(&self, start: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_from(0).into_iter().all(|b| b)
    }
}

/// A single-source multicast request: every terminal must receive the
/// source stream at a rate of at least its demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: Graph,
    pub source: NodeId,
    pub terminals: BTreeMap<NodeId, f64>,
}

impl Instance {
    pub fn new(graph: Graph, source: NodeId, terminals: BTreeMap<NodeId, f64>) -> Result<Self> {
        let n = graph.node_count();
        if source >= n {
            return Err(Error::invariant("source", format!("node id out of range [0, {n})")));
        }
        if terminals.is_empty() {
            return Err(Error::invariant("terminals", "at least one terminal required"));
        }
        if terminals.len() > n - 1 {
            return Err(Error::invariant("terminals", "more terminals than non-source nodes"));
        }
        if terminals.contains_key(&source) {
            return Err(Error::invariant("terminals", "source in terminal set"));
        }
        for (&node, &demand) in &terminals {
            if node >= n {
                return Err(Error::invariant(
                    format!("terminals[node={node}]"),
                    format!("node id out of range [0, {n})"),
                ));
            }
            if !demand.is_finite() || demand <= 0.0 {
                return Err(Error::invariant(
                    format!("terminals[node={node}].demand"),
                    format!("demand {demand} must be positive"),
                ));
            }
        }
        Ok(Instance {
            graph,
            source,
            terminals,
        })
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_terminal(&self, v: NodeId) -> bool {
        self.terminals.contains_key(&v)
    }

    pub fn demand(&self, v: NodeId) -> Option<f64> {
        self.terminals.get(&v).copied()
    }

    pub fn max_demand(&self) -> f64 {
        self.terminals.values().copied().fold(0.0, f64::max)
    }

    /// Source followed by the terminals in id order.
    pub fn required_nodes(&self) -> Vec<NodeId> {
        std::iter::once(self.source)
            .chain(self.terminals.keys().copied())
            .collect()
    }

    pub fn is_required(&self, v: NodeId) -> bool {
        v == self.source || self.is_terminal(v)
    }

    /// Returns a copy with every demand replaced by `f(node, demand)`.
    pub fn with_demands(&self, mut f: impl FnMut(NodeId, f64) -> f64) -> Result<Self> {
        let terminals = self.terminals.iter().map(|(&k, &x)| (k, f(k, x))).collect();
        Instance::new(self.graph.clone(), self.source, terminals)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceViolation {
    UnreachableTerminal(NodeId),
    Invariant(String),
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceViolation::UnreachableTerminal(t) => {
                write!(f, "terminal {t} unreachable from source")
            }
            InstanceViolation::Invariant(s) => f.write_str(s),
        }
    }
}

/// Lists everything that prevents a feasible flow network from existing.
/// An empty report means the instance is solvable.
pub fn validate_instance(inst: &Instance) -> Vec<InstanceViolation> {
    let mut report = Vec::new();
    // Re-run the structural checks so hand-assembled values are covered too.
    if let Err(e) = Instance::new(inst.graph.clone(), inst.source, inst.terminals.clone()) {
        report.push(InstanceViolation::Invariant(e.to_string()));
        return report;
    }
    let seen = inst.graph.reachable_from(inst.source);
    for &t in inst.terminals.keys() {
        if !seen[t] {
            report.push(InstanceViolation::UnreachableTerminal(t));
        }
    }
    report
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    source: usize,
    terminals: Vec<TerminalDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TerminalDoc {
    node: usize,
    demand: f64,
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let graph = Graph::new(doc.nodes, doc.edges)?;
    let mut terminals = BTreeMap::new();
    for (i, t) in doc.terminals.iter().enumerate() {
        if terminals.insert(t.node, t.demand).is_some() {
            return Err(Error::invariant(
                format!("terminals[{i}].node"),
                format!("duplicate terminal {}", t.node),
            ));
        }
    }
    Instance::new(graph, doc.source, terminals)
}

/// Canonical document: edges sorted by endpoint pair, terminals by node id.
/// Reals are written in shortest round-trip form, so parsing restores the
/// exact values.
pub fn serialize_instance(inst: &Instance) -> String {
    let doc = InstanceDoc {
        nodes: inst.graph.node_count(),
        edges: inst.graph.edges().iter().map(|e| (e.u, e.v, e.weight)).collect(),
        source: inst.source,
        terminals: inst
            .terminals
            .iter()
            .map(|(&node, &demand)| TerminalDoc { node, demand })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w1_text() -> &'static str {
        r#"{"nodes":4,"edges":[[0,1,1.0],[1,2,0.1],[1,3,0.1],[0,3,0.3]],"source":0,
            "terminals":[{"node":2,"demand":0.25},{"node":3,"demand":1.0}]}"#
    }

    #[test]
    fn smallest_legal_instance() {
        let inst = parse_instance(
            r#"{"nodes":2,"edges":[[0,1,0.5]],"source":0,"terminals":[{"node":1,"demand":1.0}]}"#,
        )
        .unwrap();
        assert_eq!(inst.graph.node_count(), 2);
        assert_eq!(inst.terminal_count(), 1);
    }

    #[test]
    fn source_in_terminal_set_rejected() {
        let err = parse_instance(
            r#"{"nodes":2,"edges":[[0,1,0.5]],"source":0,"terminals":[{"node":0,"demand":1.0}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("source in terminal set"), "{err}");
    }

    #[test]
    fn self_loop_rejected() {
        let err = parse_instance(
            r#"{"nodes":2,"edges":[[0,0,0.3]],"source":0,"terminals":[{"node":1,"demand":1.0}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
        assert!(err.to_string().contains("edges[0]"), "{err}");
    }

    #[test]
    fn unknown_fields_and_duplicates_rejected() {
        assert!(parse_instance(
            r#"{"nodes":2,"edges":[],"source":0,"terminals":[{"node":1,"demand":1.0}],"extra":1}"#
        )
        .is_err());
        assert!(parse_instance(
            r#"{"nodes":3,"edges":[[0,1,1],[1,0,2]],"source":0,"terminals":[{"node":1,"demand":1.0}]}"#
        )
        .is_err());
        assert!(parse_instance(
            r#"{"nodes":3,"edges":[[0,1,-1]],"source":0,"terminals":[{"node":1,"demand":1.0}]}"#
        )
        .is_err());
        assert!(parse_instance(
            r#"{"nodes":3,"edges":[[0,1,1]],"source":0,"terminals":[{"node":1,"demand":0}]}"#
        )
        .is_err());
    }

    #[test]
    fn zero_weight_permitted() {
        assert!(parse_instance(
            r#"{"nodes":2,"edges":[[0,1,0]],"source":0,"terminals":[{"node":1,"demand":1.0}]}"#
        )
        .is_ok());
    }

    #[test]
    fn validate_reports_unreachable() {
        let path = Instance::new(
            Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap(),
            0,
            BTreeMap::from([(2, 1.0)]),
        )
        .unwrap();
        assert!(validate_instance(&path).is_empty());

        let split = Instance::new(
            Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap(),
            0,
            BTreeMap::from([(2, 1.0)]),
        )
        .unwrap();
        let report: Vec<String> = validate_instance(&split).iter().map(|v| v.to_string()).collect();
        assert_eq!(report, ["terminal 2 unreachable from source"]);

        assert!(validate_instance(&parse_instance(w1_text()).unwrap()).is_empty());
    }

    #[test]
    fn canonical_document_sorts_edges() {
        let inst = parse_instance(w1_text()).unwrap();
        let doc = serialize_instance(&inst);
        let back = parse_instance(&doc).unwrap();
        assert_eq!(back, inst);
        let pairs: Vec<(usize, usize)> = back.graph.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, [(0, 1), (0, 3), (1, 2), (1, 3)]);
    }
}
