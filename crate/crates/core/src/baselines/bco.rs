use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::Instance;
use crate::solution::FlowSolution;

use super::ga::{random_genome, SubsetEvaluator};
use super::MetaheuristicParams;

struct Site {
    genome: Vec<bool>,
    fitness: f64,
    trials: usize,
}

/// Bee colony search over node-inclusion genomes. Employed bees and
/// onlookers try single-bit flips of a site; onlookers pick sites in
/// proportion to inverse cost; sites that stop improving are handed to
/// scouts. Site 0 starts from the all-ones genome.
pub fn solve_bco(inst: &Instance, p: &MetaheuristicParams) -> Result<FlowSolution> {
    p.check()?;
    let mut eval = SubsetEvaluator::new(inst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let len = eval.free.len();

    let mut sites: Vec<Site> = (0..p.population)
        .map(|i| {
            let genome = if i == 0 {
                vec![true; len]
            } else {
                random_genome(len, &mut rng)
            };
            let fitness = eval.fitness(&genome);
            Site {
                genome,
                fitness,
                trials: 0,
            }
        })
        .collect();
    let scouts = (p.scout_fraction * p.population as f64).ceil() as usize;

    for _ in 0..p.iterations {
        for i in 0..sites.len() {
            explore(&mut sites[i], &mut eval, &mut rng);
        }
        let weights: Vec<f64> = sites.iter().map(|s| 1.0 / (s.fitness + 1e-12)).collect();
        let pick = WeightedIndex::new(&weights).expect("positive weights");
        for _ in 0..sites.len() {
            let i = pick.sample(&mut rng);
            explore(&mut sites[i], &mut eval, &mut rng);
        }
        let mut stale: Vec<usize> = (0..sites.len())
            .filter(|&i| sites[i].trials > p.abandonment_limit)
            .collect();
        stale.sort_by_key(|&i| (std::cmp::Reverse(sites[i].trials), i));
        for &i in stale.iter().take(scouts) {
            let genome = random_genome(len, &mut rng);
            sites[i] = Site {
                fitness: eval.fitness(&genome),
                genome,
                trials: 0,
            };
        }
    }
    Ok(eval.finish("bco"))
}

fn explore(site: &mut Site, eval: &mut SubsetEvaluator<'_>, rng: &mut impl Rng) {
    if site.genome.is_empty() {
        site.trials += 1;
        return;
    }
    let mut cand = site.genome.clone();
    let k = rng.gen_range(0..cand.len());
    cand[k] = !cand[k];
    let f = eval.fitness(&cand);
    if f < site.fitness {
        site.genome = cand;
        site.fitness = f;
        site.trials = 0;
    } else {
        site.trials += 1;
    }
}
