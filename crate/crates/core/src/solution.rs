use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, NodeId};

/// Directed edge `(from, to)`, oriented from the source side toward the
/// receivers.
pub type Arc = (NodeId, NodeId);

/// A flow network: per-arc stream rate plus the resulting objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub flows: BTreeMap<Arc, f64>,
    pub cost: f64,
    pub algorithm: String,
    pub runtime_ms: f64,
}

impl FlowSolution {
    /// Builds a solution and evaluates its cost against `inst`.
    pub fn new(inst: &Instance, flows: BTreeMap<Arc, f64>, algorithm: &str) -> Result<Self> {
        let cost = total_cost(inst, &flows)?;
        Ok(FlowSolution {
            flows,
            cost,
            algorithm: algorithm.to_string(),
            runtime_ms: 0.0,
        })
    }

    /// Undirected support as sorted `(min, max)` pairs.
    pub fn edge_set(&self) -> Vec<(NodeId, NodeId)> {
        let mut v: Vec<_> = self.flows.keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Σ weight·flow over all arcs. Fails if an arc is not an edge of the graph.
pub fn total_cost(inst: &Instance, flows: &BTreeMap<Arc, f64>) -> Result<f64> {
    flows.iter().try_fold(0.0, |acc, (&(from, to), &flow)| {
        let w = if from < inst.graph.node_count() && to < inst.graph.node_count() {
            inst.graph.weight(from, to)
        } else {
            None
        };
        w.map(|w| acc + w * flow).ok_or(Error::NonEdge { from, to })
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    algorithm: String,
    cost: f64,
    flows: Vec<FlowDoc>,
    runtime_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowDoc {
    from: usize,
    to: usize,
    flow: f64,
}

/// Canonical solution document, flows ordered by `(from, to)`.
pub fn serialize_solution(sol: &FlowSolution) -> String {
    let doc = SolutionDoc {
        algorithm: sol.algorithm.clone(),
        cost: sol.cost,
        flows: sol
            .flows
            .iter()
            .map(|(&(from, to), &flow)| FlowDoc { from, to, flow })
            .collect(),
        runtime_ms: sol.runtime_ms,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("solution serializes");
    s.push('\n');
    s
}

/// Parses a solution document as written. Flow values are not checked here;
/// negative or misplaced flows are for the validator to report.
pub fn parse_solution(text: &str) -> Result<FlowSolution> {
    let doc: SolutionDoc = serde_json::from_str(text)?;
    let mut flows = BTreeMap::new();
    for (i, f) in doc.flows.iter().enumerate() {
        if flows.insert((f.from, f.to), f.flow).is_some() {
            return Err(Error::invariant(
                format!("flows[{i}]"),
                format!("duplicate arc {}->{}", f.from, f.to),
            ));
        }
    }
    Ok(FlowSolution {
        flows,
        cost: doc.cost,
        algorithm: doc.algorithm,
        runtime_ms: doc.runtime_ms,
    })
}
