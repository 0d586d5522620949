//! Parameter sweeps over generated instances, emitted as CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{Algorithm, MetaheuristicParams};
use crate::error::{Error, Result};
use crate::generate::{generate_instance, generate_regular_instance, GenConfig};
use crate::graph::Instance;
use crate::validate::check_constraints;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    NodeCount,
    NodeCountSmall,
    AvgDegree,
    RegularDegree,
    UserCount,
    DemandVariance,
}

impl SweepKind {
    pub const ALL: [SweepKind; 6] = [
        SweepKind::NodeCount,
        SweepKind::NodeCountSmall,
        SweepKind::AvgDegree,
        SweepKind::RegularDegree,
        SweepKind::UserCount,
        SweepKind::DemandVariance,
    ];

    /// Column value in the results table.
    pub fn label(self) -> &'static str {
        match self {
            SweepKind::NodeCount => "NODE_COUNT",
            SweepKind::NodeCountSmall => "NODE_COUNT_SMALL",
            SweepKind::AvgDegree => "AVG_DEGREE",
            SweepKind::RegularDegree => "REGULAR_DEGREE",
            SweepKind::UserCount => "USER_COUNT",
            SweepKind::DemandVariance => "DEMAND_VARIANCE",
        }
    }

    /// Command-line spelling.
    pub fn flag(self) -> &'static str {
        match self {
            SweepKind::NodeCount => "node-count",
            SweepKind::NodeCountSmall => "node-count-small",
            SweepKind::AvgDegree => "avg-degree",
            SweepKind::RegularDegree => "regular-degree",
            SweepKind::UserCount => "user-count",
            SweepKind::DemandVariance => "demand-variance",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.flag() == s || k.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep {s:?}")))
    }
}

/// Terminal cap applied by the small node-count sweep so the brute-force
/// oracle stays tractable.
pub const SMALL_SWEEP_MAX_TERMINALS: usize = 4;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base: GenConfig,
    pub algorithms: Vec<Algorithm>,
    pub params: MetaheuristicParams,
    /// The exact solver is skipped above this many terminals.
    pub ost_max_terminals: usize,
    /// Record wall-clock times; otherwise `runtime_ms` is written as 0 and the
    /// table is reproducible byte for byte.
    pub timing: bool,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
}

impl SweepConfig {
    pub fn new(kind: SweepKind, values: Vec<f64>, algorithms: Vec<Algorithm>) -> Self {
        SweepConfig {
            kind,
            values,
            trials: 30,
            base: GenConfig::default(),
            algorithms,
            params: MetaheuristicParams::default(),
            ost_max_terminals: 16,
            timing: false,
            threads: 0,
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.values.is_empty() {
            return bad("sweep values are empty".into());
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return bad("algorithm listed twice".into());
        }
        self.params.check()?;
        for &v in &self.values {
            let integral = v.fract() == 0.0 && v >= 0.0;
            match self.kind {
                SweepKind::NodeCount
                | SweepKind::NodeCountSmall
                | SweepKind::RegularDegree
                | SweepKind::UserCount
                    if !integral =>
                {
                    return bad(format!("{} values must be whole numbers, got {v}", self.kind.flag()));
                }
                SweepKind::DemandVariance if !(0.0..0.5).contains(&v) => {
                    return bad(format!("demand spread {v} must be in [0, 0.5)"));
                }
                SweepKind::AvgDegree if !(v > 0.0) => {
                    return bad(format!("average degree {v} must be positive"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The instance for one sweep cell.
    pub fn instance(&self, value: f64, seed: u64) -> Result<Instance> {
        let mut cfg = GenConfig {
            seed,
            ..self.base.clone()
        };
        match self.kind {
            SweepKind::NodeCount => cfg.node_count = value as usize,
            SweepKind::NodeCountSmall => {
                cfg.node_count = value as usize;
                cfg.terminal_count = cfg
                    .terminal_count
                    .min(SMALL_SWEEP_MAX_TERMINALS)
                    .min(cfg.node_count.saturating_sub(1));
            }
            SweepKind::AvgDegree => cfg.avg_degree = value,
            SweepKind::RegularDegree => return generate_regular_instance(&cfg, value as usize),
            SweepKind::UserCount => cfg.terminal_count = value as usize,
            SweepKind::DemandVariance => {
                let third = 1.0 / 3.0;
                cfg.demand_set = vec![(0.5 - value, third), (0.5, third), (0.5 + value, third)];
            }
        }
        generate_instance(&cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_kind: SweepKind,
    pub sweep_value: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub cost: f64,
    pub runtime_ms: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub improvement_pct: f64,
}

fn run_cell(cfg: &SweepConfig, value: f64, seed: u64) -> Result<Vec<ResultRow>> {
    let inst = cfg.instance(value, seed).map_err(|e| {
        Error::Bench(format!("{} = {value}, seed {seed}: {e}", cfg.kind.flag()))
    })?;
    let params = MetaheuristicParams {
        seed: cfg.params.seed.wrapping_add(seed),
        ..cfg.params.clone()
    };
    let mut rows = Vec::with_capacity(cfg.algorithms.len());
    for &alg in &cfg.algorithms {
        if alg == Algorithm::Ost && inst.terminal_count() > cfg.ost_max_terminals {
            log::warn!(
                "skipping ost at {} = {value}, seed {seed}: {} terminals > cap {}",
                cfg.kind.flag(),
                inst.terminal_count(),
                cfg.ost_max_terminals
            );
            continue;
        }
        let sol = alg.solve(&inst, &params).map_err(|e| {
            Error::Bench(format!("{alg} at {} = {value}, seed {seed}: {e}", cfg.kind.flag()))
        })?;
        rows.push(ResultRow {
            sweep_kind: cfg.kind,
            sweep_value: value,
            seed,
            algorithm: alg,
            cost: sol.cost,
            runtime_ms: if cfg.timing { sol.runtime_ms } else { 0.0 },
            feasible: check_constraints(&inst, &sol).is_empty(),
        });
    }
    Ok(rows)
}

/// Runs every (value, seed) cell, possibly in parallel, and returns the rows
/// in canonical order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ResultTable> {
    cfg.check()?;
    let cells: Vec<(f64, u64)> = cfg
        .values
        .iter()
        .flat_map(|&v| (0..cfg.trials as u64).map(move |s| (v, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Bench(format!("thread pool: {e}")))?;
    let parts: Vec<Vec<ResultRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(v, s)| run_cell(cfg, v, s))
            .collect::<Result<_>>()
    })?;
    let mut rows: Vec<ResultRow> = parts.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(ResultTable { rows })
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.seed.cmp(&b.seed))
            .then(a.algorithm.name().cmp(b.algorithm.name()))
    });
}

/// Per sweep value and algorithm: mean and sample standard deviation of the
/// cost over seeds, and how much lower the exact solver's mean is, in percent
/// of this algorithm's mean.
pub fn summarize(table: &ResultTable) -> Result<Vec<SummaryRow>> {
    // (value bits) -> algorithm -> seed -> cost
    let mut groups: BTreeMap<u64, BTreeMap<&'static str, (Algorithm, BTreeMap<u64, f64>)>> = BTreeMap::new();
    for r in &table.rows {
        groups
            .entry(r.sweep_value.to_bits())
            .or_default()
            .entry(r.algorithm.name())
            .or_insert_with(|| (r.algorithm, BTreeMap::new()))
            .1
            .insert(r.seed, r.cost);
    }
    let mut out = Vec::new();
    for (bits, algs) in &groups {
        let value = f64::from_bits(*bits);
        let (_, ost) = algs
            .get(Algorithm::Ost.name())
            .ok_or_else(|| Error::Bench(format!("no ost rows at sweep value {value}")))?;
        let ost_mean = mean(ost.values());
        for (alg, costs) in algs.values() {
            if costs.keys().ne(ost.keys()) {
                return Err(Error::Bench(format!(
                    "{alg} and ost were run on different seeds at sweep value {value}"
                )));
            }
            let m = mean(costs.values());
            out.push(SummaryRow {
                sweep_value: value,
                algorithm: *alg,
                mean_cost: m,
                std_cost: std_dev(costs.values(), m),
                improvement_pct: if m > 0.0 { 100.0 * (m - ost_mean) / m } else { 0.0 },
            });
        }
    }
    out.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.algorithm.name().cmp(b.algorithm.name()))
    });
    Ok(out)
}

fn mean<'a>(xs: impl Iterator<Item = &'a f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn std_dev<'a>(xs: impl Iterator<Item = &'a f64> + Clone, m: f64) -> f64 {
    let n = xs.clone().count();
    if n < 2 {
        return 0.0;
    }
    (xs.map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Nine significant digits in plain decimal notation.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.8}", 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub const RESULTS_HEADER: [&str; 7] = [
    "sweep_kind",
    "sweep_value",
    "seed",
    "algorithm",
    "cost",
    "runtime_ms",
    "feasible",
];

pub const SUMMARY_HEADER: [&str; 5] = [
    "sweep_value",
    "algorithm",
    "mean_cost",
    "std_cost",
    "improvement_pct",
];

fn write_csv<const N: usize>(header: [&str; N], records: impl Iterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for r in records {
        w.write_record(&r).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii csv")
}

/// Results table as CSV, rows sorted by (sweep value, seed, algorithm).
pub fn results_csv(table: &ResultTable) -> String {
    let mut rows = table.rows.clone();
    sort_rows(&mut rows);
    write_csv(
        RESULTS_HEADER,
        rows.iter().map(|r| {
            [
                r.sweep_kind.label().to_string(),
                r.sweep_value.to_string(),
                r.seed.to_string(),
                r.algorithm.name().to_string(),
                sig9(r.cost),
                sig9(r.runtime_ms),
                r.feasible.to_string(),
            ]
        }),
    )
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    write_csv(
        SUMMARY_HEADER,
        summary.iter().map(|r| {
            [
                r.sweep_value.to_string(),
                r.algorithm.name().to_string(),
                sig9(r.mean_cost),
                sig9(r.std_cost),
                sig9(r.improvement_pct),
            ]
        }),
    )
}
