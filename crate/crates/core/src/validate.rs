//! Feasibility and structure checks for flow networks.
//!
//! Rates follow multicast semantics: a relay forwards copies of one stream, so
//! conservation compares the largest outgoing rate with the largest incoming
//! rate rather than sums.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Instance, NodeId};
use crate::solution::{Arc, FlowSolution};
use crate::TOL;

pub use crate::solution::total_cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    NegFlow,
    NonedgeFlow,
    RelayConservation,
    SourceSupply,
    TerminalDemand,
    NotTree,
    LeafNotTerminal,
    BadOrientation,
    FlowLaw,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::NegFlow => "NEG_FLOW",
            ViolationCode::NonedgeFlow => "NONEDGE_FLOW",
            ViolationCode::RelayConservation => "RELAY_CONSERVATION",
            ViolationCode::SourceSupply => "SOURCE_SUPPLY",
            ViolationCode::TerminalDemand => "TERMINAL_DEMAND",
            ViolationCode::NotTree => "NOT_TREE",
            ViolationCode::LeafNotTerminal => "LEAF_NOT_TERMINAL",
            ViolationCode::BadOrientation => "BAD_ORIENTATION",
            ViolationCode::FlowLaw => "FLOW_LAW",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Node(NodeId),
    Edge(NodeId, NodeId),
    Network,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Node(v) => write!(f, "node:{v}"),
            Location::Edge(a, b) => write!(f, "edge:{a}->{b}"),
            Location::Network => f.write_str("network"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: Location,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.code, self.location, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    fn push(&mut self, code: ViolationCode, location: Location, detail: String) {
        self.violations.push(Violation {
            code,
            location,
            detail,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn in_graph(inst: &Instance, (a, b): Arc) -> bool {
    let n = inst.graph.node_count();
    a < n && b < n && inst.graph.edge_between(a, b).is_some()
}

/// Rate and edge constraints of the flow problem.
pub fn check_constraints(inst: &Instance, sol: &FlowSolution) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = inst.graph.node_count();
    let mut max_in = vec![0.0f64; n];
    let mut max_out = vec![0.0f64; n];
    for (&(a, b), &f) in &sol.flows {
        if !(f > 0.0) {
            report.push(
                ViolationCode::NegFlow,
                Location::Edge(a, b),
                format!("flow {f} is not positive"),
            );
        }
        if !in_graph(inst, (a, b)) {
            report.push(
                ViolationCode::NonedgeFlow,
                Location::Edge(a, b),
                "no such edge in the graph".into(),
            );
        }
        if a < n && b < n {
            max_out[a] = max_out[a].max(f);
            max_in[b] = max_in[b].max(f);
        }
    }
    for i in 0..n {
        if i != inst.source && max_out[i] > max_in[i] + TOL {
            report.push(
                ViolationCode::RelayConservation,
                Location::Node(i),
                format!("outflow {} exceeds inflow {}", max_out[i], max_in[i]),
            );
        }
    }
    let need = inst.max_demand();
    if max_out[inst.source] < need - TOL {
        report.push(
            ViolationCode::SourceSupply,
            Location::Node(inst.source),
            format!("source outflow {} below largest demand {need}", max_out[inst.source]),
        );
    }
    for (&t, &x) in &inst.terminals {
        if max_in[t] < x - TOL {
            report.push(
                ViolationCode::TerminalDemand,
                Location::Node(t),
                format!("inflow {} below demand {x}", max_in[t]),
            );
        }
    }
    report
}

/// Rooted tree analysis of a solution's support.
struct Support {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    order: Vec<NodeId>,
}

/// Checks that the support is a tree containing the source and all
/// terminals, oriented away from the source, with terminals at every leaf.
/// Terminals may also sit inside the tree.
pub fn check_tree(inst: &Instance, sol: &FlowSolution) -> ValidationReport {
    tree_analysis(inst, sol).0
}

fn tree_analysis(inst: &Instance, sol: &FlowSolution) -> (ValidationReport, Option<Support>) {
    let mut report = ValidationReport::default();
    let n = inst.graph.node_count();
    let arcs: Vec<Arc> = sol
        .flows
        .keys()
        .copied()
        .filter(|&(a, b)| a < n && b < n)
        .collect();

    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut in_support = vec![false; n];
    let mut pairs: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();
    for &(a, b) in &arcs {
        *pairs.entry((a.min(b), a.max(b))).or_default() += 1;
        adj[a].push(b);
        adj[b].push(a);
        in_support[a] = true;
        in_support[b] = true;
    }
    for (&(a, b), &count) in &pairs {
        if count > 1 {
            report.push(
                ViolationCode::NotTree,
                Location::Edge(a, b),
                format!("cycle {a}-{b}-{a}: flow in both directions"),
            );
        }
    }

    for v in inst.required_nodes() {
        if !in_support[v] {
            let role = if v == inst.source { "source" } else { "terminal" };
            report.push(
                ViolationCode::NotTree,
                Location::Node(v),
                format!("{role} {v} not in support"),
            );
        }
    }

    // Undirected BFS from the source, reporting edges that close cycles.
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut order = Vec::new();
    let mut cyclic = false;
    if in_support[inst.source] {
        let mut queue = std::collections::VecDeque::from([inst.source]);
        visited[inst.source] = true;
        let mut used: BTreeMap<(NodeId, NodeId), bool> = BTreeMap::new();
        while let Some(x) = queue.pop_front() {
            order.push(x);
            let mut nbrs = adj[x].clone();
            nbrs.sort_unstable();
            nbrs.dedup();
            for y in nbrs {
                let key = (x.min(y), x.max(y));
                if used.contains_key(&key) {
                    continue;
                }
                used.insert(key, true);
                if visited[y] {
                    if pairs[&key] == 1 {
                        cyclic = true;
                        report.push(
                            ViolationCode::NotTree,
                            Location::Edge(x, y),
                            format!("cycle through {}", cycle_text(&parent, x, y)),
                        );
                    }
                } else {
                    visited[y] = true;
                    parent[y] = Some(x);
                    queue.push_back(y);
                }
            }
        }
    }
    let stray: Vec<NodeId> = (0..n).filter(|&v| in_support[v] && !visited[v]).collect();
    if in_support[inst.source] && !stray.is_empty() {
        report.push(
            ViolationCode::NotTree,
            Location::Network,
            format!("support disconnected from source at nodes {stray:?}"),
        );
    }

    let mut degree = vec![0usize; n];
    for &(a, b) in pairs.keys() {
        degree[a] += 1;
        degree[b] += 1;
    }
    for v in 0..n {
        if degree[v] == 1 && v != inst.source && !inst.is_terminal(v) {
            report.push(
                ViolationCode::LeafNotTerminal,
                Location::Node(v),
                format!("leaf {v} is not a terminal"),
            );
        }
    }

    let is_tree = !cyclic && stray.is_empty() && in_support[inst.source] && !pairs.values().any(|&c| c > 1);
    if !is_tree {
        return (report, None);
    }
    for &(a, b) in &arcs {
        if parent[b] != Some(a) {
            report.push(
                ViolationCode::BadOrientation,
                Location::Edge(a, b),
                format!("arc points toward the source (parent of {a} is {b})"),
            );
        }
    }
    let mut children = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = parent[v] {
            children[p].push(v);
        }
    }
    (
        report,
        Some(Support {
            parent,
            children,
            order,
        }),
    )
}

fn cycle_text(parent: &[Option<NodeId>], x: NodeId, y: NodeId) -> String {
    let ancestors = |mut v: NodeId| {
        let mut p = vec![v];
        while let Some(u) = parent[v] {
            p.push(u);
            v = u;
        }
        p
    };
    let px = ancestors(x);
    let py = ancestors(y);
    let lca = *px.iter().find(|v| py.contains(v)).expect("same BFS tree");
    let up_x: Vec<NodeId> = px.into_iter().take_while(|&v| v != lca).collect();
    let up_y: Vec<NodeId> = py.into_iter().take_while(|&v| v != lca).collect();
    let mut seq = vec![lca];
    seq.extend(up_x.into_iter().rev());
    seq.extend(up_y);
    seq.push(lca);
    seq.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

/// Every tree edge must carry exactly the largest demand among the terminals
/// below it. A property of minimal solutions, not a feasibility condition.
pub fn check_flow_law(inst: &Instance, sol: &FlowSolution) -> Result<ValidationReport> {
    let (tree_report, support) = tree_analysis(inst, sol);
    let support = match support {
        Some(s) if !tree_report.has(ViolationCode::BadOrientation) => s,
        _ => return Err(Error::NotATree),
    };
    let n = inst.graph.node_count();
    let mut below = vec![0.0f64; n];
    for &x in support.order.iter().rev() {
        let own = inst.demand(x).unwrap_or(0.0);
        let kids = support.children[x].iter().map(|&c| below[c]).fold(0.0, f64::max);
        below[x] = own.max(kids);
    }
    let mut report = ValidationReport::default();
    for (&(a, b), &f) in &sol.flows {
        debug_assert_eq!(support.parent[b], Some(a));
        if (f - below[b]).abs() > TOL {
            report.push(
                ViolationCode::FlowLaw,
                Location::Edge(a, b),
                format!("flow {f}, expected {}", below[b]),
            );
        }
    }
    Ok(report)
}

/// Constraints, tree structure and flow law together.
pub fn check_all(inst: &Instance, sol: &FlowSolution) -> ValidationReport {
    let mut report = check_constraints(inst, sol);
    let tree = check_tree(inst, sol);
    let tree_ok = tree.is_empty();
    report.extend(tree);
    if tree_ok {
        if let Ok(law) = check_flow_law(inst, sol) {
            report.extend(law);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::w1;
    use ViolationCode::*;

    fn sol(inst: &Instance, flows: &[((usize, usize), f64)]) -> FlowSolution {
        FlowSolution {
            flows: flows.iter().copied().collect(),
            cost: 0.0,
            algorithm: "test".into(),
            runtime_ms: 0.0,
        }
        .with_cost(inst)
    }

    trait WithCost {
        fn with_cost(self, inst: &Instance) -> Self;
    }

    impl WithCost for FlowSolution {
        fn with_cost(mut self, inst: &Instance) -> Self {
            self.cost = total_cost(inst, &self.flows).unwrap_or(f64::NAN);
            self
        }
    }

    const OPT: [((usize, usize), f64); 3] = [((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)];

    #[test]
    fn optimum_is_clean() {
        let inst = w1();
        let s = sol(&inst, &OPT);
        assert!((s.cost - 0.35).abs() < 1e-12);
        assert!(check_constraints(&inst, &s).is_empty());
        assert!(check_tree(&inst, &s).is_empty());
        assert!(check_flow_law(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn constraint_violations() {
        let inst = w1();
        let low = sol(&inst, &[((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.1)]);
        let r = check_constraints(&inst, &low);
        assert_eq!(r.codes(), [TerminalDemand]);
        assert_eq!(r.violations[0].location, Location::Node(2));

        let short = sol(&inst, &[((0, 3), 0.5)]);
        let r = check_constraints(&inst, &short);
        assert!(r.has(SourceSupply));
        assert!(r.has(TerminalDemand));

        let neg = sol(&inst, &[((0, 3), -1.0)]);
        assert!(check_constraints(&inst, &neg).has(NegFlow));

        let non_edge = FlowSolution {
            flows: BTreeMap::from([((0, 2), 1.0)]),
            cost: 0.0,
            algorithm: "x".into(),
            runtime_ms: 0.0,
        };
        assert!(check_constraints(&inst, &non_edge).has(NonedgeFlow));

        let relay = sol(&inst, &[((0, 3), 0.25), ((3, 1), 1.0), ((1, 2), 1.0)]);
        assert!(check_constraints(&inst, &relay).has(RelayConservation));
    }

    #[test]
    fn equality_is_enough() {
        let inst = w1();
        let s = sol(&inst, &[((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)]);
        assert!(!check_constraints(&inst, &s).has(TerminalDemand));
    }

    #[test]
    fn tree_violations() {
        let inst = w1();
        let mut cyc = OPT.to_vec();
        cyc.push(((0, 1), 0.25));
        let r = check_tree(&inst, &sol(&inst, &cyc));
        assert!(r.has(NotTree), "{r}");
        let line = r.to_string();
        assert!(line.contains("cycle"), "{line}");
        assert!(["0-1-3-0", "0-3-1-0"].iter().any(|c| line.contains(c)), "{line}");

        let r = check_tree(&inst, &sol(&inst, &[((1, 2), 0.25)]));
        assert!(r.has(NotTree));
        assert!(r.to_string().contains("source 0 not in support"));

        let flipped = sol(&inst, &[((3, 0), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)]);
        assert_eq!(check_tree(&inst, &flipped).codes(), [BadOrientation]);

        let spur = sol(&inst, &[((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25), ((0, 1), 0.0)]);
        assert!(check_tree(&inst, &spur).has(NotTree));
    }

    #[test]
    fn leaf_must_be_terminal() {
        let g = crate::graph::Graph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(2, 1.0)])).unwrap();
        let s = sol(&inst, &[((0, 1), 1.0), ((1, 2), 1.0), ((1, 3), 1.0)]);
        assert_eq!(check_tree(&inst, &s).codes(), [LeafNotTerminal]);
        assert!(check_constraints(&inst, &s).is_empty());
    }

    #[test]
    fn flow_law() {
        let inst = w1();
        let raised = sol(&inst, &[((0, 3), 1.0), ((3, 1), 1.0), ((1, 2), 0.25)]);
        let r = check_flow_law(&inst, &raised).unwrap();
        assert_eq!(r.codes(), [FlowLaw]);
        assert_eq!(r.violations[0].location, Location::Edge(3, 1));
        assert!(r.violations[0].detail.contains("expected 0.25"));

        let cyc = sol(&inst, &[((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25), ((0, 1), 0.25)]);
        assert!(matches!(check_flow_law(&inst, &cyc), Err(Error::NotATree)));
    }

    #[test]
    fn report_lines() {
        let inst = w1();
        let r = check_constraints(&inst, &sol(&inst, &[((0, 3), -1.0)]));
        let text = r.to_string();
        assert!(text.lines().next().unwrap().starts_with("NEG_FLOW edge:0->3 "));
    }
}
