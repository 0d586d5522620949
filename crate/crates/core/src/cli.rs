//! `ost` command line: solve, gen, validate, bench.
//!
//! Exit status is the machine-readable failure class:
//! 0 success, 1 usage or I/O error, 2 infeasible instance, 3 infeasible
//! solution (refused by `solve`, reported by `validate` and `bench`).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{Algorithm, MetaheuristicParams};
use crate::bench::{results_csv, run_sweep, summarize, summary_csv, SweepConfig, SweepKind};
use crate::error::Error;
use crate::generate::{default_demand_set, generate_instance, generate_regular_instance, GenConfig};
use crate::graph::{parse_instance, serialize_instance, validate_instance};
use crate::solution::{parse_solution, serialize_solution};
use crate::validate::{check_constraints, check_flow_law, check_tree};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE_INSTANCE: i32 = 2;
pub const EXIT_INFEASIBLE_SOLUTION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ost", version, about = "Minimum-cost multicast flow with per-receiver rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance document and print the solution document.
    Solve(SolveArgs),
    /// Generate a random instance document.
    Gen(GenArgs),
    /// Check a solution document against an instance.
    Validate(ValidateArgs),
    /// Run a parameter sweep and write CSV tables.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct MetaArgs {
    /// Seed for the metaheuristics.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Population size (GA individuals, BCO sites).
    #[arg(long = "ga-pop", alias = "pop", default_value_t = 50)]
    population: usize,
    #[arg(long, default_value_t = 0.8)]
    ga_crossover: f64,
    #[arg(long, default_value_t = 0.02)]
    ga_mutation: f64,
    #[arg(long, default_value_t = 3)]
    ga_tournament: usize,
    #[arg(long, default_value_t = 20)]
    aco_ants: usize,
    /// Pheromone evaporation per iteration.
    #[arg(long, default_value_t = 0.1)]
    aco_rho: f64,
    #[arg(long, default_value_t = 1.0)]
    aco_alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    aco_beta: f64,
    #[arg(long, default_value_t = 0.1)]
    bco_scout: f64,
    #[arg(long, default_value_t = 10)]
    bco_limit: usize,
}

impl MetaArgs {
    fn params(&self) -> MetaheuristicParams {
        MetaheuristicParams {
            population: self.population,
            iterations: self.iters,
            seed: self.seed,
            crossover_rate: self.ga_crossover,
            mutation_rate: self.ga_mutation,
            tournament_size: self.ga_tournament,
            ant_count: self.aco_ants,
            evaporation: self.aco_rho,
            pheromone_weight: self.aco_alpha,
            heuristic_weight: self.aco_beta,
            scout_fraction: self.bco_scout,
            abandonment_limit: self.bco_limit,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// ost, oracle, mst, spt, ga, aco or bco.
    #[arg(long, default_value = "ost")]
    algorithm: String,
    /// Write the solution here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report measured runtime (otherwise runtime_ms is 0 and output is reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    meta: MetaArgs,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, required_unless_present = "regular_degree")]
    avg_degree: Option<f64>,
    #[arg(long)]
    terminals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Demand distribution as value:probability pairs, e.g. `1:0.5,0.25:0.5`.
    #[arg(long)]
    demands: Option<String>,
    /// Build a random regular graph of this degree instead.
    #[arg(long)]
    regular_degree: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Also require a source-rooted tree with terminal leaves.
    #[arg(long)]
    structure: bool,
    /// Also require every edge to carry exactly the largest demand below it.
    #[arg(long)]
    flow_law: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// node-count, node-count-small, avg-degree, regular-degree, user-count or demand-variance.
    #[arg(long)]
    sweep: String,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "ost,mst,spt,ga,aco,bco")]
    algorithms: Vec<String>,
    /// Base node count for fields not being swept.
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 8)]
    terminals: usize,
    /// Results CSV path (stdout if omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary CSV path.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    ost_max_terminals: usize,
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    meta: MetaArgs,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => EXIT_INFEASIBLE_INSTANCE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}"))),
    }
}

/// Runs the CLI with explicit streams and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let algorithm: Algorithm = a.algorithm.parse()?;
    let inst = parse_instance(&read(&a.instance)?)?;
    let report = validate_instance(&inst);
    if !report.is_empty() {
        return Err(Error::Infeasible(report).into());
    }
    let params = a.meta.params();
    params.check()?;
    let mut sol = algorithm.solve(&inst, &params)?;
    let check = check_constraints(&inst, &sol);
    if !check.is_empty() {
        return Err(Failure {
            code: EXIT_INFEASIBLE_SOLUTION,
            message: format!("{algorithm} produced an infeasible solution:\n{check}"),
        });
    }
    if !a.timing {
        sol.runtime_ms = 0.0;
    }
    emit(a.output.as_deref(), &serialize_solution(&sol), out)?;
    Ok(EXIT_OK)
}

fn parse_demands(spec: &str) -> Result<Vec<(f64, f64)>, Failure> {
    spec.split(',')
        .map(|pair| {
            let (x, p) = pair
                .split_once(':')
                .ok_or_else(|| Failure::usage(format!("demand entry {pair:?} is not value:probability")))?;
            let x = x.trim().parse::<f64>().map_err(|e| Failure::usage(format!("{x:?}: {e}")))?;
            let p = p.trim().parse::<f64>().map_err(|e| Failure::usage(format!("{p:?}: {e}")))?;
            Ok((x, p))
        })
        .collect()
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = GenConfig {
        node_count: a.nodes,
        avg_degree: a.avg_degree.or(a.regular_degree.map(|d| d as f64)).unwrap_or_default(),
        terminal_count: a.terminals,
        demand_set: match &a.demands {
            Some(s) => parse_demands(s)?,
            None => default_demand_set(),
        },
        seed: a.seed,
    };
    let inst = match a.regular_degree {
        Some(d) => generate_regular_instance(&cfg, d)?,
        None => generate_instance(&cfg)?,
    };
    emit(a.output.as_deref(), &serialize_instance(&inst), out)?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = parse_instance(&read(&a.instance)?)?;
    let sol = parse_solution(&read(&a.solution)?)?;
    let mut report = check_constraints(&inst, &sol);
    if a.structure || a.flow_law {
        let tree = check_tree(&inst, &sol);
        let tree_ok = tree.is_empty();
        report.extend(tree);
        if a.flow_law && tree_ok {
            report.extend(check_flow_law(&inst, &sol)?);
        }
    }
    emit(None, &report.to_string(), out)?;
    Ok(if report.is_empty() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE_SOLUTION
    })
}

fn bench_threads() -> usize {
    std::env::var("OST_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let kind: SweepKind = a.sweep.parse()?;
    let algorithms = a
        .algorithms
        .iter()
        .map(|s| s.trim().parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SweepConfig {
        kind,
        values: a.values,
        trials: a.trials,
        base: GenConfig {
            node_count: a.nodes,
            avg_degree: a.avg_degree,
            terminal_count: a.terminals,
            demand_set: default_demand_set(),
            seed: 0,
        },
        algorithms,
        params: a.meta.params(),
        ost_max_terminals: a.ost_max_terminals,
        timing: a.timing,
        threads: bench_threads(),
    };
    let table = run_sweep(&cfg)?;
    emit(a.csv.as_deref(), &results_csv(&table), out)?;
    if let Some(path) = a.summary.as_deref() {
        let summary = summarize(&table)?;
        emit(Some(path), &summary_csv(&summary), out)?;
    }
    if table.rows.iter().any(|r| !r.feasible) {
        return Err(Failure {
            code: EXIT_INFEASIBLE_SOLUTION,
            message: "some rows hold infeasible solutions".into(),
        });
    }
    Ok(EXIT_OK)
}
