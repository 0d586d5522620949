//! Small hand-checkable instances.

use std::collections::BTreeMap;

use crate::graph::{Graph, Instance};

/// Four-node worked instance: source 0, terminals 2 (demand 0.25) and
/// 3 (demand 1.0). Optimal cost 0.35 via 0→3→1→2.
pub fn w1() -> Instance {
    w1_with_demands(0.25, 1.0)
}

pub fn w1_with_demands(d2: f64, d3: f64) -> Instance {
    let g = Graph::new(4, [(0, 1, 1.0), (1, 2, 0.1), (1, 3, 0.1), (0, 3, 0.3)]).unwrap();
    Instance::new(g, 0, BTreeMap::from([(2, d2), (3, d3)])).unwrap()
}

/// Path 0–1–2 with weights 0.4 and 0.6, single terminal 2.
pub fn chain(demand: f64) -> Instance {
    let g = Graph::new(3, [(0, 1, 0.4), (1, 2, 0.6)]).unwrap();
    Instance::new(g, 0, BTreeMap::from([(2, demand)])).unwrap()
}
