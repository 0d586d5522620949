//! Exact solver: dynamic programming over (node, terminal subset) states.
//!
//! `cost(v, S)` is the cheapest flow network rooted at `v` that delivers every
//! terminal in `S` its demand. Subsets are solved in order of increasing size.
//! Each subset first tries to join two solved halves at a common node
//! ([`DpTable::merge`]), then pushes the best values outward along edges at a
//! per-unit price of the largest demand in the subset ([`DpTable::grow`]).
//!
//! Only the last decision per state is stored. Sub-solutions are rebuilt on
//! demand by following decisions, which is also how a merge candidate is
//! priced: the two halves are unioned edge by edge, keeping the larger flow on
//! any shared edge.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{validate_instance, EdgeId, Instance, NodeId};
use crate::solution::{Arc, FlowSolution};
use crate::tree::extract_tree;

/// Bitmask over terminal indices; bit `i` is the `i`-th terminal by node id.
pub type Mask = u32;

/// Hard limit on the number of terminals the table can index.
pub const MAX_TERMINALS: usize = 24;

/// How a state's value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Unset,
    /// `v` is the sole terminal of the subset.
    LeafTerminal,
    /// Union of the solutions for this submask and its complement at `v`.
    Merge(Mask),
    /// Edge `v → u` carrying the subset's largest demand, then `u`'s solution.
    Extend(NodeId),
}

#[derive(Debug, Clone)]
pub struct DpTable {
    node_count: usize,
    terminals: Vec<NodeId>,
    terminal_index: BTreeMap<NodeId, usize>,
    max_demand: Vec<f64>,
    cost: Vec<f64>,
    decision: Vec<Decision>,
}

impl DpTable {
    #[inline]
    fn at(&self, v: NodeId, mask: Mask) -> usize {
        mask as usize * self.node_count + v
    }

    pub fn cost(&self, v: NodeId, mask: Mask) -> f64 {
        self.cost[self.at(v, mask)]
    }

    pub fn decision(&self, v: NodeId, mask: Mask) -> Decision {
        self.decision[self.at(v, mask)]
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    pub fn full_mask(&self) -> Mask {
        ((1u64 << self.terminals.len()) - 1) as Mask
    }

    /// Bit position of a terminal node.
    pub fn terminal_bit(&self, node: NodeId) -> Option<usize> {
        self.terminal_index.get(&node).copied()
    }

    /// Mask of the given terminal nodes. Panics on a non-terminal.
    pub fn mask_of(&self, nodes: &[NodeId]) -> Mask {
        nodes
            .iter()
            .map(|n| 1 << self.terminal_bit(*n).expect("terminal node"))
            .fold(0, |a, b| a | b)
    }

    /// Largest demand among the terminals in `mask`.
    pub fn max_demand(&self, mask: Mask) -> f64 {
        self.max_demand[mask as usize]
    }

    /// Masks in solve order: by population count, then numeric value.
    pub fn subset_order(&self) -> Vec<Mask> {
        let mut masks: Vec<Mask> = (1..=self.full_mask()).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks
    }

    /// Joins pairs of solved halves at each node. Every unordered split of
    /// `mask` is tried once; a candidate must be strictly cheaper to replace
    /// the current decision.
    pub fn merge(&mut self, inst: &Instance, mask: Mask) {
        let low = mask & mask.wrapping_neg();
        let mut acc = Collector::new(inst);
        for v in 0..self.node_count {
            let slot = self.at(v, mask);
            let mut best = self.cost[slot];
            let mut choice = None;
            let mut part = (mask - 1) & mask;
            while part > 0 {
                if part & low != 0 {
                    let a = self.cost(v, part);
                    let b = self.cost(v, mask ^ part);
                    // The union costs at least as much as either half.
                    if a.is_finite() && b.is_finite() && a.max(b) < best {
                        acc.clear();
                        acc.add_state(self, inst, v, part);
                        acc.add_state(self, inst, v, mask ^ part);
                        let c = acc.cost(inst);
                        if c < best {
                            best = c;
                            choice = Some(part);
                        }
                    }
                }
                part = (part - 1) & mask;
            }
            if let Some(part) = choice {
                self.cost[slot] = best;
                self.decision[slot] = Decision::Merge(part);
            }
        }
    }

    /// Settles `cost(·, mask)` to the least fixed point of
    /// `cost(v) = min(cost(v), cost(u) + x_max · w(v, u))`, lowest cost first.
    pub fn grow(&mut self, inst: &Instance, mask: Mask) {
        let x = self.max_demand(mask);
        let base = self.at(0, mask);
        let mut heap = BinaryHeap::new();
        for v in 0..self.node_count {
            let c = self.cost[base + v];
            if c.is_finite() {
                heap.push(Label { cost: c, node: v });
            }
        }
        while let Some(Label { cost, node }) = heap.pop() {
            if cost != self.cost[base + node] {
                continue;
            }
            for &(u, eid) in inst.graph.neighbors(node) {
                let cand = cost + x * inst.graph.edge(eid).weight;
                if cand < self.cost[base + u] {
                    self.cost[base + u] = cand;
                    self.decision[base + u] = Decision::Extend(node);
                    heap.push(Label { cost: cand, node: u });
                }
            }
        }
    }

    /// Rebuilds the flow network behind state `(v, mask)`.
    pub fn reconstruct(&self, inst: &Instance, v: NodeId, mask: Mask) -> Result<FlowSolution> {
        if mask == 0 || !self.cost(v, mask).is_finite() {
            return Err(Error::UnreachableState { node: v, mask });
        }
        let mut acc = Collector::new(inst);
        acc.add_state(self, inst, v, mask);
        FlowSolution::new(inst, acc.flows(), "ost")
    }
}

#[derive(Debug, PartialEq)]
struct Label {
    cost: f64,
    node: NodeId,
}

impl Eq for Label {}

impl Ord for Label {
    // reversed: BinaryHeap pops the cheapest, ties to the lower node id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edge-indexed accumulator for unions of sub-solutions. A shared edge keeps
/// the larger flow and the orientation it was first seen with.
struct Collector {
    flow: Vec<f64>,
    arc: Vec<Arc>,
    touched: Vec<EdgeId>,
    stack: Vec<(NodeId, Mask)>,
}

impl Collector {
    fn new(inst: &Instance) -> Self {
        let m = inst.graph.edge_count();
        Collector {
            flow: vec![0.0; m],
            arc: vec![(0, 0); m],
            touched: Vec::new(),
            stack: Vec::new(),
        }
    }

    fn clear(&mut self) {
        for &e in &self.touched {
            self.flow[e] = 0.0;
        }
        self.touched.clear();
    }

    fn add_state(&mut self, table: &DpTable, inst: &Instance, v: NodeId, mask: Mask) {
        self.stack.push((v, mask));
        while let Some((v, mask)) = self.stack.pop() {
            match table.decision(v, mask) {
                Decision::LeafTerminal | Decision::Unset => {}
                Decision::Merge(part) => {
                    self.stack.push((v, mask ^ part));
                    self.stack.push((v, part));
                }
                Decision::Extend(u) => {
                    let e = inst.graph.edge_between(v, u).expect("extend follows an edge");
                    let x = table.max_demand(mask);
                    if self.flow[e] == 0.0 {
                        self.touched.push(e);
                        self.arc[e] = (v, u);
                        self.flow[e] = x;
                    } else if x > self.flow[e] {
                        self.flow[e] = x;
                    }
                    self.stack.push((u, mask));
                }
            }
        }
    }

    fn cost(&self, inst: &Instance) -> f64 {
        self.touched
            .iter()
            .map(|&e| inst.graph.edge(e).weight * self.flow[e])
            .sum()
    }

    fn flows(&self) -> BTreeMap<Arc, f64> {
        self.touched.iter().map(|&e| (self.arc[e], self.flow[e])).collect()
    }
}

/// Boundary values: zero at each terminal for its own singleton, `+∞`
/// everywhere else (including the empty subset).
pub fn dp_init(inst: &Instance) -> Result<DpTable> {
    let k = inst.terminal_count();
    if k > MAX_TERMINALS {
        return Err(Error::invariant(
            "terminals",
            format!("{k} terminals exceed the solver limit of {MAX_TERMINALS}"),
        ));
    }
    let n = inst.graph.node_count();
    let terminals: Vec<NodeId> = inst.terminals.keys().copied().collect();
    let demands: Vec<f64> = inst.terminals.values().copied().collect();
    let states = 1usize << k;
    let mut max_demand = vec![0.0f64; states];
    for mask in 1..states {
        let low = mask.trailing_zeros() as usize;
        max_demand[mask] = max_demand[mask & (mask - 1)].max(demands[low]);
    }
    let mut table = DpTable {
        node_count: n,
        terminal_index: terminals.iter().enumerate().map(|(i, &t)| (t, i)).collect(),
        terminals,
        max_demand,
        cost: vec![f64::INFINITY; states * n],
        decision: vec![Decision::Unset; states * n],
    };
    for i in 0..k {
        let slot = table.at(table.terminals[i], 1 << i);
        table.cost[slot] = 0.0;
        table.decision[slot] = Decision::LeafTerminal;
    }
    Ok(table)
}

pub fn dp_merge(table: &mut DpTable, inst: &Instance, mask: Mask) {
    table.merge(inst, mask);
}

pub fn dp_grow(table: &mut DpTable, inst: &Instance, mask: Mask) {
    table.grow(inst, mask);
}

pub fn reconstruct(table: &DpTable, inst: &Instance, v: NodeId, mask: Mask) -> Result<FlowSolution> {
    table.reconstruct(inst, v, mask)
}

/// Fills every state of the table.
pub fn solve_table(inst: &Instance) -> Result<DpTable> {
    let mut table = dp_init(inst)?;
    for mask in table.subset_order() {
        if mask.count_ones() > 1 {
            table.merge(inst, mask);
        }
        table.grow(inst, mask);
    }
    Ok(table)
}

/// Minimum-cost multicast flow network for `inst`.
///
/// The returned network is a tree rooted at the source with every edge
/// carrying the largest demand below it.
pub fn solve_ost(inst: &Instance) -> Result<FlowSolution> {
    let report = validate_instance(inst);
    if !report.is_empty() {
        return Err(Error::Infeasible(report));
    }
    let start = Instant::now();
    let table = solve_table(inst)?;
    let raw = table.reconstruct(inst, inst.source, table.full_mask())?;
    // Only differs from `raw` when ties let two sub-solutions overlap.
    let mut sol = extract_tree(inst, &raw.flows, "ost")
        .filter(|t| t.cost <= raw.cost + crate::TOL)
        .unwrap_or(raw);
    sol.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, w1, w1_with_demands};
    use crate::graph::Graph;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn single_edge() {
        let g = Graph::new(2, [(0, 1, 0.5)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(1, 0.5)])).unwrap();
        let sol = solve_ost(&inst).unwrap();
        assert!(close(sol.cost, 0.25));
        assert_eq!(sol.flows, BTreeMap::from([((0, 1), 0.5)]));
    }

    #[test]
    fn w1_optimum() {
        let sol = solve_ost(&w1()).unwrap();
        assert!(close(sol.cost, 0.35), "{}", sol.cost);
        assert_eq!(
            sol.flows,
            BTreeMap::from([((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)])
        );
        let both = solve_ost(&w1_with_demands(1.0, 1.0)).unwrap();
        assert!(close(both.cost, 0.5));
        assert_eq!(
            both.flows,
            BTreeMap::from([((0, 3), 1.0), ((3, 1), 1.0), ((1, 2), 1.0)])
        );
    }

    #[test]
    fn init_boundaries() {
        let inst = w1();
        let t = dp_init(&inst).unwrap();
        let d1 = t.mask_of(&[2]);
        let d2 = t.mask_of(&[3]);
        assert_eq!(t.cost(2, d1), 0.0);
        assert_eq!(t.cost(3, d2), 0.0);
        assert_eq!(t.decision(2, d1), Decision::LeafTerminal);
        assert!(t.cost(0, d1).is_infinite());
        for v in 0..4 {
            assert!(t.cost(v, 0).is_infinite());
        }
    }

    #[test]
    fn w1_transitions_by_hand() {
        let inst = w1();
        let mut t = dp_init(&inst).unwrap();
        let d1 = t.mask_of(&[2]);
        let d2 = t.mask_of(&[3]);
        let full = d1 | d2;

        t.grow(&inst, d1);
        t.grow(&inst, d2);
        assert!(close(t.cost(0, d2), 0.3));
        assert!(close(t.cost(3, d1), 0.05));
        assert!(close(t.cost(0, d1), 0.125));
        assert!(close(t.cost(0, d1), 0.5 * 0.25));

        t.merge(&inst, full);
        // at 3: own singleton (0) joined with 3→1→2 (0.05)
        assert!(close(t.cost(3, full), 0.05));
        assert_eq!(t.decision(3, full), Decision::Merge(d1));
        // at 0: 0→3→1→2 at 0.25 unioned with 0→3 at 1.0 shares edge (0,3)
        assert!(close(t.cost(0, full), 0.3 + 0.05));

        t.grow(&inst, full);
        assert!(close(t.cost(0, full), 0.35));
        let sol = t.reconstruct(&inst, 0, full).unwrap();
        assert!(close(sol.cost, 0.35));
        assert_eq!(
            sol.flows,
            BTreeMap::from([((0, 3), 1.0), ((3, 1), 0.25), ((1, 2), 0.25)])
        );
    }

    #[test]
    fn merge_without_finite_halves_is_noop() {
        let inst = w1();
        let mut t = dp_init(&inst).unwrap();
        let full = t.full_mask();
        t.merge(&inst, full);
        for v in 0..4 {
            assert!(t.cost(v, full).is_infinite());
            assert_eq!(t.decision(v, full), Decision::Unset);
        }
    }

    #[test]
    fn reconstruct_boundaries() {
        let inst = w1();
        let t = dp_init(&inst).unwrap();
        let d1 = t.mask_of(&[2]);
        let leaf = t.reconstruct(&inst, 2, d1).unwrap();
        assert!(leaf.flows.is_empty());
        assert_eq!(leaf.cost, 0.0);
        assert!(matches!(
            t.reconstruct(&inst, 0, d1),
            Err(Error::UnreachableState { node: 0, .. })
        ));

        let c = chain(0.5);
        let sol = solve_ost(&c).unwrap();
        assert_eq!(sol.flows, BTreeMap::from([((0, 1), 0.5), ((1, 2), 0.5)]));
        assert!(close(sol.cost, 0.5));
    }

    #[test]
    fn infeasible_instance_errors() {
        let g = Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let inst = Instance::new(g, 0, BTreeMap::from([(2, 1.0)])).unwrap();
        assert!(matches!(solve_ost(&inst), Err(Error::Infeasible(_))));
    }

    #[test]
    fn subset_order_by_size_then_value() {
        let inst = crate::generate::generate_instance(&crate::generate::GenConfig {
            node_count: 10,
            avg_degree: 3.0,
            terminal_count: 3,
            ..Default::default()
        })
        .unwrap();
        let t = dp_init(&inst).unwrap();
        assert_eq!(t.subset_order(), vec![1, 2, 4, 3, 5, 6, 7]);
    }
}
