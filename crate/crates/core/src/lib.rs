//! Exact minimum-cost multicast flow with heterogeneous receiver rates.
//!
//! A single source streams to a set of terminals, each asking for its own
//! rate. A link carrying the stream toward several terminals only needs the
//! largest of their rates, so the cheapest network is a tree whose edges are
//! priced at the largest demand below them. [`dp::solve_ost`] finds it exactly
//! by dynamic programming over terminal subsets; [`oracle`] provides a
//! brute-force check, [`baselines`] the comparison heuristics and [`bench`] the
//! experiment sweeps.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod dp;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod solution;
pub mod tree;
pub mod validate;

pub use dp::solve_ost;
pub use error::{Error, Result};
pub use generate::{generate_instance, GenConfig};
pub use graph::{parse_instance, serialize_instance, validate_instance, Graph, Instance};
pub use solution::{parse_solution, serialize_solution, FlowSolution};

/// Absolute tolerance for flow and cost comparisons.
pub const TOL: f64 = 1e-9;
