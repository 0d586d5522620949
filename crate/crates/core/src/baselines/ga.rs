use std::collections::HashMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{validate_instance, Instance, NodeId};
use crate::solution::FlowSolution;
use crate::Error;

use super::{decode_node_subset, penalty, MetaheuristicParams};

/// Decodes inclusion genomes over the non-required nodes, remembering every
/// genome seen and the best feasible network so far.
pub(crate) struct SubsetEvaluator<'a> {
    inst: &'a Instance,
    pub(crate) free: Vec<NodeId>,
    cache: HashMap<Vec<bool>, f64>,
    penalty: f64,
    pub(crate) best: Option<FlowSolution>,
}

impl<'a> SubsetEvaluator<'a> {
    pub(crate) fn new(inst: &'a Instance) -> Result<Self> {
        let report = validate_instance(inst);
        if !report.is_empty() {
            return Err(Error::Infeasible(report));
        }
        let free = (0..inst.graph.node_count()).filter(|&v| !inst.is_required(v)).collect();
        Ok(SubsetEvaluator {
            inst,
            free,
            cache: HashMap::new(),
            penalty: penalty(inst),
            best: None,
        })
    }

    pub(crate) fn fitness(&mut self, genome: &[bool]) -> f64 {
        if let Some(&f) = self.cache.get(genome) {
            return f;
        }
        let mut selected = vec![false; self.inst.graph.node_count()];
        for (&v, &bit) in self.free.iter().zip(genome) {
            selected[v] = bit;
        }
        let f = match decode_node_subset(self.inst, &selected) {
            Some(sol) => {
                let c = sol.cost;
                if self.best.as_ref().is_none_or(|b| c < b.cost) {
                    self.best = Some(sol);
                }
                c
            }
            None => self.penalty,
        };
        self.cache.insert(genome.to_vec(), f);
        f
    }

    pub(crate) fn finish(self, algorithm: &str) -> FlowSolution {
        let mut sol = self.best.expect("the all-ones genome decodes on a valid instance");
        sol.algorithm = algorithm.to_string();
        sol
    }
}

pub(crate) fn random_genome(len: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..len).map(|_| rng.gen_bool(0.5)).collect()
}

/// Genetic algorithm over node-inclusion genomes: tournament selection,
/// uniform crossover, per-bit mutation and one elite carried over. The
/// all-ones genome is part of the first generation.
pub fn solve_ga(inst: &Instance, p: &MetaheuristicParams) -> Result<FlowSolution> {
    p.check()?;
    let mut eval = SubsetEvaluator::new(inst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let len = eval.free.len();

    let mut pop: Vec<Vec<bool>> = vec![vec![true; len]];
    while pop.len() < p.population {
        pop.push(random_genome(len, &mut rng));
    }
    let mut fit: Vec<f64> = pop.iter().map(|g| eval.fitness(g)).collect();

    for _ in 0..p.iterations {
        let elite = (0..pop.len())
            .min_by(|&a, &b| fit[a].total_cmp(&fit[b]))
            .expect("nonempty population");
        let mut next = vec![pop[elite].clone()];
        while next.len() < p.population {
            let a = tournament(&fit, p.tournament_size, &mut rng);
            let b = tournament(&fit, p.tournament_size, &mut rng);
            let mut child = if rng.gen::<f64>() < p.crossover_rate {
                pop[a]
                    .iter()
                    .zip(&pop[b])
                    .map(|(&x, &y)| if rng.gen_bool(0.5) { x } else { y })
                    .collect()
            } else {
                pop[a].clone()
            };
            for bit in child.iter_mut() {
                if rng.gen::<f64>() < p.mutation_rate {
                    *bit = !*bit;
                }
            }
            next.push(child);
        }
        pop = next;
        fit = pop.iter().map(|g| eval.fitness(g)).collect();
    }
    Ok(eval.finish("ga"))
}

fn tournament(fit: &[f64], size: usize, rng: &mut impl Rng) -> usize {
    (0..size)
        .map(|_| rng.gen_range(0..fit.len()))
        .min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)))
        .expect("tournament size is positive")
}
