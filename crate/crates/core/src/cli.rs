//! Command-line front end: `gen`, `solve`, `bench` and `sweep`.
//!
//! Exit codes: 0 on success, 1 when a solver stops at a limit or without
//! closing the gap, 2 for usage and input errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decomposition::DecompositionParams;
use crate::loctrans::{self, generate, problem_for, LocTransInstance, WeightChoice};
use crate::model::{load_instance, ModelError, TwoStageProblem};
use crate::report::{Method, SolveError, SolveReport, Termination};
use crate::{generate_weights_galpha, solve, WeightKind, WeightVector};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SOLVER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub const BENCH_HEADER: &str =
    "n,m,K,method,instance_seed,time_s,iterations,master_pct,sub_pct,solved";
pub const SWEEP_HEADER: &str = "alpha,objective,expected_cost,worst_case_cost,time_s";

#[derive(Debug, Parser)]
#[command(name = "wowa", version, about = "Two-stage WOWA optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a location-transportation instance.
    Gen(GenArgs),
    /// Solve an instance with one method.
    Solve(SolveArgs),
    /// Benchmark methods over generated instances and write CSV.
    Bench(BenchArgs),
    /// Solve one instance across a range of risk attitudes.
    Sweep(SweepArgs),
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn alpha_value(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err("alpha must lie in (0, 1)".into())
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of customers.
    #[arg(long, value_parser = positive)]
    pub n: usize,
    /// Number of candidate sites.
    #[arg(long, value_parser = positive)]
    pub m: usize,
    /// Number of scenarios.
    #[arg(long = "K", value_parser = positive)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    /// g_α weights from `--alpha`.
    Galpha,
    /// Uniform w: expected cost.
    Uniform,
    /// Same as `uniform`.
    Riskneutral,
    /// w = e₁ with uniform p: worst case.
    Robust,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    pub max_iter: usize,
    /// Seconds.
    #[arg(long = "time-limit", default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Lower bound on every recourse value; defaults to 0 for nonnegative
    /// recourse costs.
    #[arg(long = "theta-floor")]
    pub theta_floor: Option<f64>,
    /// Solve scenario subproblems on worker threads.
    #[arg(long)]
    pub parallel: bool,
}

impl SolverArgs {
    pub fn params(&self) -> Result<DecompositionParams, String> {
        if !(self.epsilon > 0.0) {
            return Err("--epsilon must be positive".into());
        }
        if !(self.time_limit > 0.0) || !self.time_limit.is_finite() {
            return Err("--time-limit must be a positive number of seconds".into());
        }
        Ok(DecompositionParams {
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            time_limit: Duration::from_secs_f64(self.time_limit),
            theta_floor: self.theta_floor,
            parallel: self.parallel,
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file (location-transportation or generic two-stage).
    pub instance: PathBuf,
    #[arg(long, default_value = "benders")]
    pub method: Method,
    /// Weight family; a generic instance keeps its own weights when absent.
    #[arg(long, value_enum)]
    pub weights: Option<WeightsArg>,
    #[arg(long, default_value_t = 0.1, value_parser = alpha_value)]
    pub alpha: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report file; not written when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Semicolon-separated `n,m,K` triples.
    #[arg(long, default_value = "5,5,10;10,10,20;10,10,50;20,20,50")]
    pub sizes: String,
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub instances: usize,
    /// Comma-separated methods.
    #[arg(long, default_value = "direct,benders,subgradient")]
    pub methods: String,
    /// Seed of the first instance of each size; later ones count up.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "galpha")]
    pub weights: WeightsArg,
    #[arg(long, default_value_t = 0.1, value_parser = alpha_value)]
    pub alpha: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Concurrent solves.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub jobs: usize,
    /// CSV file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Location-transportation instance file.
    pub instance: PathBuf,
    /// Comma-separated α values or the labels `riskneutral` / `robust`.
    #[arg(
        long,
        default_value = "riskneutral,1e-1,1e-2,1e-3,1e-4,1e-5,1e-6,1e-7,1e-8,1e-9,robust"
    )]
    pub alphas: String,
    #[arg(long, default_value = "direct")]
    pub method: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] ModelError),
    #[error(transparent)]
    Solver(SolveError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => EXIT_USAGE,
            CliError::Solver(SolveError::Model(_)) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => CliError::Input(m),
            other => CliError::Solver(other),
        }
    }
}

fn weight_choice(arg: WeightsArg, alpha: f64) -> WeightChoice {
    match arg {
        WeightsArg::Galpha => WeightChoice::GAlpha(alpha),
        WeightsArg::Uniform | WeightsArg::Riskneutral => WeightChoice::RiskNeutral,
        WeightsArg::Robust => WeightChoice::Robust,
    }
}

/// Parses `"5,5,10;10,10,20"` into `(n, m, K)` triples.
pub fn parse_sizes(s: &str) -> Result<Vec<(usize, usize, usize)>, String> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v: Vec<usize> = t
                .split(',')
                .map(|x| positive(x.trim()))
                .collect::<Result<_, _>>()
                .map_err(|e| format!("size `{t}`: {e}"))?;
            match v.as_slice() {
                &[n, m, k] => Ok((n, m, k)),
                _ => Err(format!("size `{t}` must be n,m,K")),
            }
        })
        .collect()
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>, String> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

/// Parses the sweep list; labels other than `riskneutral`, `uniform` and
/// `robust` are α values in (0, 1).
pub fn parse_alphas(s: &str) -> Result<Vec<WeightChoice>, String> {
    s.split(',')
        .map(|t| match t.trim() {
            "riskneutral" | "uniform" | "1" => Ok(WeightChoice::RiskNeutral),
            "robust" => Ok(WeightChoice::Robust),
            other => alpha_value(other)
                .map(WeightChoice::GAlpha)
                .map_err(|e| format!("`{other}`: {e}")),
        })
        .collect()
}

/// A file is a location-transportation instance when it has a `loctrans`
/// header block.
enum InstanceFile {
    LocTrans(LocTransInstance),
    Generic(TwoStageProblem),
}

fn load_any(path: &Path) -> Result<InstanceFile, ModelError> {
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_loctrans = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .is_some_and(|v| v.get("loctrans").is_some());
    if is_loctrans {
        Ok(InstanceFile::LocTrans(LocTransInstance::load(path)?))
    } else {
        Ok(InstanceFile::Generic(load_instance(path)?))
    }
}

fn reweight(
    problem: &TwoStageProblem,
    choice: WeightChoice,
) -> Result<TwoStageProblem, ModelError> {
    let k = problem.num_scenarios();
    let weights_err = |source| ModelError::Weights {
        location: "w".into(),
        source,
    };
    let (w, p) = match choice {
        WeightChoice::GAlpha(a) => (
            generate_weights_galpha(a, k).map_err(weights_err)?,
            problem.p().clone(),
        ),
        WeightChoice::RiskNeutral => (
            WeightVector::uniform(k, WeightKind::Preferential).map_err(weights_err)?,
            problem.p().clone(),
        ),
        WeightChoice::Robust => (
            WeightVector::worst_case(k).map_err(weights_err)?,
            WeightVector::uniform(k, WeightKind::Importance).map_err(weights_err)?,
        ),
    };
    problem.with_weights(w, p)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| {
            CliError::Input(ModelError::Io {
                path: path.to_path_buf(),
                source,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let inst = generate(args.n, args.m, args.k, args.seed);
    let mut text = inst.to_json();
    text.push('\n');
    write_output(args.out.as_deref(), &text)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<SolveReport, CliError> {
    let params = args.solver.params().map_err(CliError::Usage)?;
    let problem = match load_any(&args.instance)? {
        InstanceFile::LocTrans(inst) => problem_for(
            &inst,
            weight_choice(args.weights.unwrap_or(WeightsArg::Galpha), args.alpha),
        )?,
        InstanceFile::Generic(p) => match args.weights {
            Some(w) => reweight(&p, weight_choice(w, args.alpha))?,
            None => p,
        },
    };
    let (report, failure) = match solve(&problem, args.method, &params) {
        Ok(r) => (r, None),
        Err(e) => match e.report().cloned() {
            Some(r) => (r, Some(e)),
            None => return Err(e.into()),
        },
    };
    if let Some(out) = &args.out {
        report.save(out)?;
    }
    println!(
        "method {} objective {:.9e} gap {:.3e} termination {:?} iterations {}",
        report.method, report.objective, report.final_gap, report.termination, report.iterations
    );
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(report),
    }
}

/// One data row of the benchmark CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub method: Method,
    pub instance_seed: u64,
    pub time_s: f64,
    pub iterations: usize,
    pub master_pct: f64,
    pub sub_pct: f64,
    pub solved: bool,
}

fn bench_one(
    size: (usize, usize, usize),
    seed: u64,
    method: Method,
    choice: WeightChoice,
    params: &DecompositionParams,
) -> BenchRow {
    let (n, m, k) = size;
    let inst = generate(n, m, k, seed);
    let outcome = problem_for(&inst, choice)
        .map_err(SolveError::from)
        .and_then(|problem| solve(&problem, method, params));
    let (report, solved) = match &outcome {
        Ok(r) => (Some(r), r.termination == Termination::GapClosed),
        Err(e) => {
            log::warn!("({n},{m},{k}) seed {seed} {method}: {e}");
            (e.report(), false)
        }
    };
    BenchRow {
        n,
        m,
        k,
        method,
        instance_seed: seed,
        time_s: report.map_or(f64::NAN, |r| r.wall_time_s),
        iterations: report.map_or(0, |r| r.iterations),
        master_pct: report.map_or(f64::NAN, |r| r.master_pct()),
        sub_pct: report.map_or(f64::NAN, |r| r.sub_pct()),
        solved,
    }
}

/// Runs every (size, method, instance) combination, on `jobs` threads.
/// Rows come back in size, method, instance order.
pub fn run_bench(
    sizes: &[(usize, usize, usize)],
    instances: usize,
    methods: &[Method],
    base_seed: u64,
    choice: WeightChoice,
    params: &DecompositionParams,
    jobs: usize,
) -> Vec<BenchRow> {
    let mut tasks = Vec::new();
    for &size in sizes {
        for &method in methods {
            for i in 0..instances {
                tasks.push((size, method, base_seed + i as u64));
            }
        }
    }
    let results: Vec<Mutex<Option<BenchRow>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(tasks.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(size, method, seed)) = tasks.get(i) else {
                    break;
                };
                let row = bench_one(size, seed, method, choice, params);
                *results[i].lock().expect("result slot") = Some(row);
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.into_inner().expect("result slot").expect("task ran"))
        .collect()
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}

/// Data rows plus one average row per (size, method) over solved instances.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    let mut i = 0;
    while i < rows.len() {
        let key = (rows[i].n, rows[i].m, rows[i].k, rows[i].method);
        let start = i;
        while i < rows.len() && (rows[i].n, rows[i].m, rows[i].k, rows[i].method) == key {
            let r = &rows[i];
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.m,
                r.k,
                r.method,
                r.instance_seed,
                fmt_num(r.time_s),
                r.iterations,
                fmt_num(r.master_pct),
                fmt_num(r.sub_pct),
                u8::from(r.solved)
            );
            i += 1;
        }
        let solved: Vec<&BenchRow> = rows[start..i].iter().filter(|r| r.solved).collect();
        let mean = |f: &dyn Fn(&BenchRow) -> f64| {
            if solved.is_empty() {
                f64::NAN
            } else {
                solved.iter().map(|r| f(r)).sum::<f64>() / solved.len() as f64
            }
        };
        let _ = writeln!(
            out,
            "{},{},{},{},avg,{},{},{},{},{}",
            key.0,
            key.1,
            key.2,
            key.3,
            fmt_num(mean(&|r| r.time_s)),
            fmt_num(mean(&|r| r.iterations as f64)),
            fmt_num(mean(&|r| r.master_pct)),
            fmt_num(mean(&|r| r.sub_pct)),
            solved.len()
        );
    }
    out
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let sizes = parse_sizes(&args.sizes).map_err(CliError::Usage)?;
    let methods = parse_methods(&args.methods).map_err(CliError::Usage)?;
    let params = args.solver.params().map_err(CliError::Usage)?;
    let choice = weight_choice(args.weights, args.alpha);
    let rows = run_bench(
        &sizes,
        args.instances,
        &methods,
        args.seed,
        choice,
        &params,
        args.jobs,
    );
    write_output(args.out.as_deref(), &bench_csv(&rows))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub choice: WeightChoice,
    pub objective: f64,
    pub expected_cost: f64,
    pub worst_case_cost: f64,
    pub time_s: f64,
}

pub fn run_sweep(
    inst: &LocTransInstance,
    choices: &[WeightChoice],
    method: Method,
    params: &DecompositionParams,
) -> Result<Vec<SweepRecord>, CliError> {
    let mut records = Vec::with_capacity(choices.len());
    for &choice in choices {
        let problem = problem_for(inst, choice)?;
        let report = solve(&problem, method, params)?;
        let eval = loctrans::evaluate_solution(inst, &report.first_stage)?;
        records.push(SweepRecord {
            choice,
            objective: report.objective,
            expected_cost: eval.expected_cost,
            worst_case_cost: eval.worst_case_cost,
            time_s: report.wall_time_s,
        });
    }
    Ok(records)
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.choice.label(),
            fmt_num(r.objective),
            fmt_num(r.expected_cost),
            fmt_num(r.worst_case_cost),
            fmt_num(r.time_s)
        );
    }
    out
}

/// Whether expected cost weakly rises and worst-case cost weakly falls
/// along the sweep, up to relative slack `tol`.
pub fn sweep_shape(records: &[SweepRecord], tol: f64) -> (bool, bool) {
    let rising = records
        .windows(2)
        .all(|w| w[1].expected_cost >= w[0].expected_cost * (1.0 - tol));
    let falling = records
        .windows(2)
        .all(|w| w[1].worst_case_cost <= w[0].worst_case_cost * (1.0 + tol));
    (rising, falling)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRecord>, CliError> {
    let choices = parse_alphas(&args.alphas).map_err(CliError::Usage)?;
    let params = args.solver.params().map_err(CliError::Usage)?;
    let inst = LocTransInstance::load(&args.instance)?;
    let records = run_sweep(&inst, &choices, args.method, &params)?;
    write_output(args.out.as_deref(), &sweep_csv(&records))?;
    let (rising, falling) = sweep_shape(&records, 1e-3);
    eprintln!("expected cost weakly rising: {rising}; worst-case cost weakly falling: {falling}");
    Ok(records)
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| EXIT_OK),
        Command::Solve(a) => cmd_solve(a).map(|_| EXIT_OK),
        Command::Bench(a) => cmd_bench(a).map(|_| EXIT_OK),
        Command::Sweep(a) => cmd_sweep(a).map(|_| EXIT_OK),
    }
}

/// Entry point shared by the binary: parses arguments, configures logging
/// from `WOWA_LOG`, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("WOWA_LOG", "warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
