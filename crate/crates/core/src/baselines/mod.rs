//! Comparison solvers. All return a [`FlowSolution`] the validator and the
//! bench harness can consume uniformly.

mod aco;
mod bco;
mod decode;
mod ga;
mod mst;
mod spt;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use aco::solve_aco;
pub use bco::solve_bco;
pub use decode::decode_node_subset;
pub use ga::solve_ga;
pub use mst::solve_mst_prune;
pub use spt::{merge_paths, shortest_path, solve_sp_union};

use crate::error::{Error, Result};
use crate::graph::Instance;
use crate::oracle::{brute_force_optimum, OracleLimits};
use crate::solution::FlowSolution;

/// Knobs for the three metaheuristics. Defaults are common textbook values.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaheuristicParams {
    pub population: usize,
    pub iterations: usize,
    pub seed: u64,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub ant_count: usize,
    pub evaporation: f64,
    pub pheromone_weight: f64,
    pub heuristic_weight: f64,
    pub scout_fraction: f64,
    pub abandonment_limit: usize,
}

impl Default for MetaheuristicParams {
    fn default() -> Self {
        MetaheuristicParams {
            population: 50,
            iterations: 100,
            seed: 0,
            crossover_rate: 0.8,
            mutation_rate: 0.02,
            tournament_size: 3,
            ant_count: 20,
            evaporation: 0.1,
            pheromone_weight: 1.0,
            heuristic_weight: 2.0,
            scout_fraction: 0.1,
            abandonment_limit: 10,
        }
    }
}

impl MetaheuristicParams {
    pub fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("invalid metaheuristic parameter: {what}")));
        if self.population == 0 {
            return bad("population must be positive");
        }
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must be in [0, 1]");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be positive");
        }
        if self.ant_count == 0 {
            return bad("ant_count must be positive");
        }
        if !(self.evaporation > 0.0 && self.evaporation < 1.0) {
            return bad("evaporation must be in (0, 1)");
        }
        if !(self.pheromone_weight >= 0.0 && self.heuristic_weight >= 0.0) {
            return bad("pheromone and heuristic weights must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.scout_fraction) {
            return bad("scout_fraction must be in [0, 1]");
        }
        if self.abandonment_limit == 0 {
            return bad("abandonment_limit must be positive");
        }
        Ok(())
    }
}

/// Every solver the CLI and the bench harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Ost,
    Oracle,
    Mst,
    Spt,
    Ga,
    Aco,
    Bco,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Ost,
        Algorithm::Oracle,
        Algorithm::Mst,
        Algorithm::Spt,
        Algorithm::Ga,
        Algorithm::Aco,
        Algorithm::Bco,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ost => "ost",
            Algorithm::Oracle => "oracle",
            Algorithm::Mst => "mst",
            Algorithm::Spt => "spt",
            Algorithm::Ga => "ga",
            Algorithm::Aco => "aco",
            Algorithm::Bco => "bco",
        }
    }

    /// Runs the solver and stamps the wall-clock time.
    pub fn solve(self, inst: &Instance, params: &MetaheuristicParams) -> Result<FlowSolution> {
        let start = Instant::now();
        let mut sol = match self {
            Algorithm::Ost => crate::dp::solve_ost(inst)?,
            Algorithm::Oracle => brute_force_optimum(inst, OracleLimits::default())?,
            Algorithm::Mst => solve_mst_prune(inst)?,
            Algorithm::Spt => solve_sp_union(inst)?,
            Algorithm::Ga => solve_ga(inst, params)?,
            Algorithm::Aco => solve_aco(inst, params)?,
            Algorithm::Bco => solve_bco(inst, params)?,
        };
        sol.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(sol)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Fitness of an infeasible genome: worse than any real network.
pub(crate) fn penalty(inst: &Instance) -> f64 {
    let total: f64 = inst.graph.edges().iter().map(|e| e.weight).sum();
    1.0 + 2.0 * total * inst.max_demand()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("dijkstra".parse::<Algorithm>().is_err());
    }

    #[test]
    fn params_checked() {
        assert!(MetaheuristicParams::default().check().is_ok());
        let p = MetaheuristicParams {
            evaporation: 1.0,
            ..Default::default()
        };
        assert!(p.check().is_err());
    }
}
