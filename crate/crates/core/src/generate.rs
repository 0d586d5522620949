//! Seeded random instances.
//!
//! All randomness comes from a `ChaCha8Rng` seeded with `GenConfig::seed`,
//! which is portable across platforms, so a config always maps to the same
//! instance bit for bit.

use std::collections::{BTreeMap, HashSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Instance, NodeId};

/// Demand ratios for full, half and quarter resolution, equally likely.
pub fn default_demand_set() -> Vec<(f64, f64)> {
    vec![(1.0, 1.0 / 3.0), (0.5, 1.0 / 3.0), (0.25, 1.0 / 3.0)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub node_count: usize,
    pub avg_degree: f64,
    pub terminal_count: usize,
    /// `(demand, probability)` pairs.
    pub demand_set: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            node_count: 100,
            avg_degree: 4.0,
            terminal_count: 8,
            demand_set: default_demand_set(),
            seed: 0,
        }
    }
}

impl GenConfig {
    /// Number of edges the generated graph will have.
    pub fn edge_count(&self) -> usize {
        (self.node_count as f64 * self.avg_degree / 2.0).round() as usize
    }

    pub fn check(&self) -> Result<()> {
        let n = self.node_count;
        if n < 2 {
            return Err(Error::Config("node_count must be at least 2".into()));
        }
        if !(self.avg_degree.is_finite() && self.avg_degree > 0.0) {
            return Err(Error::Config("avg_degree must be positive".into()));
        }
        if self.terminal_count == 0 || self.terminal_count > n - 1 {
            return Err(Error::Config(format!(
                "terminal_count must be in [1, {}]",
                n - 1
            )));
        }
        let m = self.edge_count();
        if m > n * (n - 1) / 2 {
            return Err(Error::Config(format!(
                "{m} edges exceed the {} possible pairs",
                n * (n - 1) / 2
            )));
        }
        if m < n - 1 {
            return Err(Error::Config(format!(
                "cannot guarantee connectivity: {m} edges < {} needed",
                n - 1
            )));
        }
        check_demand_set(&self.demand_set)
    }
}

fn check_demand_set(set: &[(f64, f64)]) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Config("demand_set is empty".into()));
    }
    let mut total = 0.0;
    for &(x, p) in set {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Config(format!("demand {x} must be positive")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("probability {p} outside [0, 1]")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Connected random graph: a uniform random spanning tree (decoded from a
/// random Prüfer sequence) plus extra edges drawn uniformly among absent
/// pairs. Weights are i.i.d. uniform on (0, 1).
pub fn generate_instance(cfg: &GenConfig) -> Result<Instance> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.node_count;
    let mut pairs = random_spanning_tree(n, &mut rng);
    let mut present: HashSet<(NodeId, NodeId)> = pairs.iter().copied().collect();
    let extra = cfg.edge_count() - pairs.len();
    let absent = n * (n - 1) / 2 - pairs.len();
    if extra > 0 {
        if 2 * extra <= absent {
            while pairs.len() < cfg.edge_count() {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a == b {
                    continue;
                }
                let p = (a.min(b), a.max(b));
                if present.insert(p) {
                    pairs.push(p);
                }
            }
        } else {
            let mut candidates: Vec<(NodeId, NodeId)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|p| !present.contains(p))
                .collect();
            let (chosen, _) = candidates.partial_shuffle(&mut rng, extra);
            pairs.extend_from_slice(chosen);
        }
    }
    pairs.sort_unstable();
    finish(n, pairs, cfg.terminal_count, &cfg.demand_set, &mut rng)
}

/// Random `degree`-regular graph by the pairing model, retried until the
/// result is simple and connected.
pub fn generate_regular_instance(cfg: &GenConfig, degree: usize) -> Result<Instance> {
    let n = cfg.node_count;
    if degree == 0 || degree >= n {
        return Err(Error::Config(format!("degree must be in [1, {}]", n - 1)));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::Config("node_count * degree must be even".into()));
    }
    if degree == 1 && n > 2 {
        return Err(Error::Config("a 1-regular graph on more than 2 nodes is disconnected".into()));
    }
    let probe = GenConfig {
        avg_degree: degree as f64,
        ..cfg.clone()
    };
    probe.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    const ATTEMPTS: usize = 10_000;
    for _ in 0..ATTEMPTS {
        let mut stubs: Vec<NodeId> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::new();
        let mut ok = true;
        for c in stubs.chunks(2) {
            let (a, b) = (c[0], c[1]);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut pairs: Vec<_> = seen.into_iter().collect();
        pairs.sort_unstable();
        let g = Graph::new(n, pairs.iter().map(|&(a, b)| (a, b, 1.0)))?;
        if !g.is_connected() {
            continue;
        }
        return finish(n, pairs, cfg.terminal_count, &cfg.demand_set, &mut rng);
    }
    Err(Error::Config(format!(
        "no simple connected {degree}-regular graph found in {ATTEMPTS} attempts"
    )))
}

fn finish(
    n: usize,
    pairs: Vec<(NodeId, NodeId)>,
    terminal_count: usize,
    demand_set: &[(f64, f64)],
    rng: &mut ChaCha8Rng,
) -> Result<Instance> {
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(a, b)| (a, b, open_unit(rng)))
        .collect();
    let graph = Graph::new(n, edges)?;

    let picked = rand::seq::index::sample(rng, n, terminal_count + 1).into_vec();
    let source = picked[0];
    let dist = WeightedIndex::new(demand_set.iter().map(|&(_, p)| p))
        .map_err(|e| Error::Config(format!("demand_set: {e}")))?;
    let terminals: BTreeMap<_, _> = picked[1..]
        .iter()
        .map(|&t| (t, demand_set[dist.sample(rng)].0))
        .collect();
    Instance::new(graph, source, terminals)
}

/// Uniform on the open interval (0, 1).
fn open_unit(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 {
            return x;
        }
    }
}

fn random_spanning_tree(n: usize, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let prufer: Vec<NodeId> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &prufer {
        degree[x] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> = (0..n)
        .filter(|&v| degree[v] == 1)
        .map(std::cmp::Reverse)
        .collect();
    let mut out = Vec::with_capacity(n - 1);
    for &x in &prufer {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        out.push((leaf.min(x), leaf.max(x)));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(std::cmp::Reverse(x));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().unwrap();
    let std::cmp::Reverse(b) = leaves.pop().unwrap();
    out.push((a.min(b), a.max(b)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::serialize_instance;

    fn cfg(n: usize, d: f64, k: usize, seed: u64) -> GenConfig {
        GenConfig {
            node_count: n,
            avg_degree: d,
            terminal_count: k,
            seed,
            ..GenConfig::default()
        }
    }

    #[test]
    fn forced_complete_graph() {
        for seed in 0..5 {
            let inst = generate_instance(&cfg(4, 3.0, 1, seed)).unwrap();
            assert_eq!(inst.graph.edge_count(), 6);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_instance(&cfg(50, 4.0, 8, 7)).unwrap();
        let b = generate_instance(&cfg(50, 4.0, 8, 7)).unwrap();
        assert_eq!(serialize_instance(&a), serialize_instance(&b));
        let c = generate_instance(&cfg(50, 4.0, 8, 8)).unwrap();
        assert_ne!(serialize_instance(&a), serialize_instance(&c));
    }

    #[test]
    fn demands_from_default_set() {
        let inst = generate_instance(&cfg(50, 4.0, 8, 7)).unwrap();
        assert_eq!(inst.terminal_count(), 8);
        assert!(!inst.is_terminal(inst.source));
        for &x in inst.terminals.values() {
            assert!([1.0, 0.5, 0.25].contains(&x), "{x}");
        }
    }

    #[test]
    fn too_sparse_rejected() {
        let err = generate_instance(&cfg(4, 0.5, 1, 0)).unwrap_err();
        assert!(err.to_string().contains("cannot guarantee connectivity"), "{err}");
        assert!(generate_instance(&cfg(4, 3.5, 1, 0)).is_err());
        assert!(generate_instance(&cfg(4, 3.0, 4, 0)).is_err());
    }

    #[test]
    fn spanning_tree_is_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..30 {
            let pairs = random_spanning_tree(n, &mut rng);
            let g = Graph::new(n, pairs.iter().map(|&(a, b)| (a, b, 1.0))).unwrap();
            assert_eq!(g.edge_count(), n - 1);
            assert!(g.is_connected());
        }
    }

    #[test]
    fn dense_fill_path() {
        // 9 of 10 possible pairs: goes through the enumeration branch.
        let inst = generate_instance(&cfg(5, 3.6, 2, 1)).unwrap();
        assert_eq!(inst.graph.edge_count(), 9);
        assert!(inst.graph.is_connected());
    }

    #[test]
    fn regular_graphs() {
        let inst = generate_regular_instance(&cfg(20, 4.0, 5, 2), 3).unwrap();
        assert!(inst.graph.is_connected());
        for v in 0..20 {
            assert_eq!(inst.graph.neighbors(v).len(), 3);
        }
        assert!(generate_regular_instance(&cfg(21, 4.0, 5, 2), 3).is_err());
    }
}
