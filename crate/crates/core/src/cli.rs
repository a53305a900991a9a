//! Command-line front end: input → instance → driver → CSV reports.
//!
//! Exit codes: 0 when the front is complete, 2 when the time budget cut it
//! short, 1 on any error (usage errors included).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::ast::{AstError, AstNode};
use crate::cache::{self, CacheError, RefactoringCache};
use crate::enumerator;
use crate::metrics::MetricsError;
use crate::moalgo::{self, FrontPoint, HybridOptions, MoError, RunOutcome, WeightVector};
use crate::model::{Instance, ModelConfig, ModelError, ObjectiveKind, DEFAULT_TAU};
use crate::solver::{Limits, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Single objective optimum.
    ObtainResults,
    WeightedSum,
    /// AUGMECON; two objectives.
    EpsilonConstraint,
    /// Box decomposition with full p-split.
    HybridMethod,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::ObtainResults => "obtain-results",
            Algorithm::WeightedSum => "weighted-sum",
            Algorithm::EpsilonConstraint => "epsilon-constraint",
            Algorithm::HybridMethod => "hybrid-method",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ccreduce", version, about = "Pick extract-method refactorings that reduce cognitive complexity")]
pub struct Cli {
    /// Method tree as JSON, or a directory holding a refactoring cache.
    #[arg(long)]
    pub input: PathBuf,
    /// Method to load when the cache directory holds several.
    #[arg(long)]
    pub method: Option<String>,
    /// Number of objectives, taken from the front of --order.
    #[arg(long, default_value_t = 3)]
    pub objectives: usize,
    #[arg(long, value_enum, default_value_t = Algorithm::HybridMethod)]
    pub algorithm: Algorithm,
    /// Largest residual CC allowed in any method.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub threshold: u32,
    #[arg(long, value_delimiter = ',', default_value = "EXTRACTIONS,CC,LOC")]
    pub order: Vec<String>,
    /// Weight vector for weighted-sum, e.g. `0.3,0.7` or `1/3,2/3`; repeatable.
    #[arg(long, action = clap::ArgAction::Append)]
    pub weights: Vec<String>,
    /// Points per axis of the uniform weight lattice for weighted-sum.
    #[arg(long)]
    pub weight_combos: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub time_budget: f64,
    /// Solver node budget, for reproducible interruption.
    #[arg(long, hide = true)]
    pub max_nodes: Option<u64>,
    #[arg(long, default_value = "results")]
    pub output: PathBuf,
    /// Solve queued boxes concurrently (hybrid-method only).
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Ast { path: PathBuf, source: AstError },
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Algorithm(#[from] MoError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("instance is infeasible: no selection keeps every method at or below CC {0}")]
    Infeasible(u32),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Validated run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub method: Option<String>,
    pub algorithm: Algorithm,
    pub model: ModelConfig,
    pub weights: Vec<WeightVector>,
    pub time_budget: Duration,
    pub max_nodes: Option<u64>,
    pub output: PathBuf,
    pub parallel: bool,
}

const DEFAULT_WEIGHT_COMBOS: usize = 11;

impl TryFrom<Cli> for RunConfig {
    type Error = CliError;

    fn try_from(cli: Cli) -> Result<Self, CliError> {
        let usage = |m: String| CliError::Usage(m);
        let order: Vec<ObjectiveKind> = cli.order.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        if !(1..=3).contains(&cli.objectives) {
            return Err(usage(format!("--objectives must be 1, 2 or 3, got {}", cli.objectives)));
        }
        if order.len() < cli.objectives {
            return Err(usage(format!(
                "--order names {} objectives but {} are requested",
                order.len(),
                cli.objectives
            )));
        }
        let objectives = order[..cli.objectives].to_vec();
        let model = ModelConfig::new(cli.threshold, objectives)?;
        let p = cli.objectives;
        match cli.algorithm {
            Algorithm::ObtainResults if p != 1 => {
                return Err(usage("obtain-results requires exactly 1 objective".into()))
            }
            Algorithm::EpsilonConstraint if p != 2 => {
                return Err(usage("epsilon-constraint requires exactly 2 objectives".into()))
            }
            Algorithm::WeightedSum | Algorithm::HybridMethod if p < 2 => {
                return Err(usage(format!("{} requires at least 2 objectives", cli.algorithm.name())))
            }
            _ => {}
        }
        let weighted = cli.algorithm == Algorithm::WeightedSum;
        if !weighted && (!cli.weights.is_empty() || cli.weight_combos.is_some()) {
            return Err(usage("--weights and --weight-combos only apply to weighted-sum".into()));
        }
        if !cli.weights.is_empty() && cli.weight_combos.is_some() {
            return Err(usage("give either --weights or --weight-combos, not both".into()));
        }
        let weights = if !weighted {
            Vec::new()
        } else if cli.weights.is_empty() {
            let combos = cli.weight_combos.unwrap_or(DEFAULT_WEIGHT_COMBOS);
            if combos == 0 {
                return Err(usage("--weight-combos must be positive".into()));
            }
            moalgo::simplex_lattice(p, combos)
        } else {
            cli.weights.iter().map(|w| parse_weights(w, p)).collect::<Result<_, _>>()?
        };
        if !(cli.time_budget.is_finite() && cli.time_budget > 0.0) {
            return Err(usage("--time-budget must be a positive number of seconds".into()));
        }
        if cli.parallel && cli.algorithm != Algorithm::HybridMethod {
            return Err(usage("--parallel only applies to hybrid-method".into()));
        }
        Ok(RunConfig {
            input: cli.input,
            method: cli.method,
            algorithm: cli.algorithm,
            model,
            weights,
            time_budget: Duration::from_secs_f64(cli.time_budget),
            max_nodes: cli.max_nodes,
            output: cli.output,
            parallel: cli.parallel,
        })
    }
}

/// Parses `a,b,…` where each entry is an integer, a decimal or `n/d`;
/// the vector is normalized to sum to one.
pub fn parse_weights(text: &str, p: usize) -> Result<WeightVector, CliError> {
    let raw: Vec<Weight> = text.split(',').map(parse_rational).collect::<Result<_, _>>()?;
    if raw.len() != p {
        return Err(CliError::Usage(format!("weight vector `{text}` has {} entries, expected {p}", raw.len())));
    }
    Ok(WeightVector::normalized(&raw)?)
}

fn parse_rational(s: &str) -> Result<Weight, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("`{s}` is not a number"));
    if s.contains('/') {
        return s.parse::<Weight>().map_err(|_| bad());
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if !int.bytes().all(|b| b.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    if frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Weight::new(sign * (int * den + frac), den))
}

/// Loads a cache from an AST JSON file or a cache directory.
pub fn load_input(path: &Path, method: Option<&str>) -> Result<RefactoringCache, CliError> {
    if path.is_dir() {
        return Ok(cache::load_cache_dir(path, method)?);
    }
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let ast = AstNode::from_json(&text).map_err(|source| CliError::Ast { path: path.to_path_buf(), source })?;
    let name = method
        .map(str::to_owned)
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "method".into());
    Ok(enumerator::enumerate_feasible(&ast, &name)?)
}

#[derive(Debug)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub exit_code: i32,
}

/// Solves and writes `solutions.csv` (streamed), then the summary files.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let cache = load_input(&cfg.input, cfg.method.as_deref())?;
    let inst = Instance::new(&cache, &cfg.model)?;
    fs::create_dir_all(&cfg.output).map_err(|source| CliError::Write { path: cfg.output.clone(), source })?;

    let names: Vec<&str> = cfg.model.objectives.iter().map(|k| k.short_name()).collect();
    let solutions_path = cfg.output.join("solutions.csv");
    let file =
        File::create(&solutions_path).map_err(|source| CliError::Write { path: solutions_path.clone(), source })?;
    let mut solutions = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = names.clone();
    header.push("extractions");
    solutions.write_record(&header)?;
    solutions.flush().map_err(|source| CliError::Write { path: solutions_path.clone(), source })?;

    let mut stream_error: Option<CliError> = None;
    let on_point = |p: &FrontPoint| {
        if stream_error.is_some() {
            return;
        }
        let res = solutions
            .write_record(solution_row(p))
            .map_err(CliError::from)
            .and_then(|_| solutions.flush().map_err(|source| CliError::Write { path: solutions_path.clone(), source }));
        if let Err(e) = res {
            stream_error = Some(e);
        }
    };

    let mut limits = Limits::within(cfg.time_budget);
    limits.max_nodes = cfg.max_nodes;
    let outcome = match cfg.algorithm {
        Algorithm::ObtainResults => moalgo::obtain_results(&inst, &limits, on_point)?,
        Algorithm::WeightedSum => moalgo::weighted_sum(&inst, &cfg.weights, &limits, on_point)?,
        Algorithm::EpsilonConstraint => moalgo::augmecon(&inst, &limits, on_point)?,
        Algorithm::HybridMethod => {
            let lookahead = if cfg.parallel { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { 0 };
            moalgo::hybrid_full_p_split(&inst, &limits, HybridOptions { lookahead }, on_point)?
        }
    };
    if let Some(e) = stream_error {
        return Err(e);
    }
    if outcome.front.is_empty() && outcome.complete {
        return Err(CliError::Infeasible(cfg.model.tau));
    }
    write_summaries(&cfg.output, &names, &outcome)?;
    Ok(RunReport { exit_code: if outcome.complete { 0 } else { 2 }, outcome })
}

fn solution_row(p: &FrontPoint) -> Vec<String> {
    let mut row: Vec<String> = p.objectives.iter().map(i64::to_string).collect();
    let ids: Vec<String> = p.selection.extracted().iter().map(u32::to_string).collect();
    row.push(ids.join(" "));
    row
}

fn write_summaries(dir: &Path, names: &[&str], outcome: &RunOutcome) -> Result<(), CliError> {
    let discovered: Vec<Vec<i64>> = outcome.front.points().iter().map(|p| p.objectives.clone()).collect();

    let mut pf = csv::Writer::from_path(dir.join("pf_points.csv"))?;
    pf.write_record(names)?;
    for v in outcome.front.vectors() {
        pf.write_record(v.iter().map(i64::to_string))?;
    }
    pf.flush().map_err(|source| CliError::Write { path: dir.join("pf_points.csv"), source })?;

    let mut pc = csv::Writer::from_path(dir.join("parallel_coordinates.csv"))?;
    let mut header = vec!["solution"];
    header.extend_from_slice(names);
    pc.write_record(&header)?;
    for (k, v) in discovered.iter().enumerate() {
        let mut row = vec![format!("s{}", k + 1)];
        row.extend(v.iter().map(i64::to_string));
        pc.write_record(&row)?;
    }
    pc.flush().map_err(|source| CliError::Write { path: dir.join("parallel_coordinates.csv"), source })?;

    let mut stats = csv::Writer::from_path(dir.join("stats.csv"))?;
    let mut header: Vec<String> =
        ["n_solutions", "complete", "reference", "ideal", "normalized_hv"].map(String::from).to_vec();
    for n in names {
        header.push(format!("{n}_median"));
        header.push(format!("{n}_iqr"));
    }
    stats.write_record(&header)?;
    if discovered.is_empty() {
        let mut row = vec!["0".to_string(), outcome.complete.to_string()];
        row.resize(header.len(), String::new());
        stats.write_record(&row)?;
    } else {
        let s = analysis::front_stats(&discovered)?;
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let mut row = vec![
            s.n_solutions.to_string(),
            outcome.complete.to_string(),
            join(&s.reference),
            join(&s.ideal),
            format!("{:.4}", s.normalized_hv_f64()),
        ];
        for (m, iqr) in &s.per_objective {
            row.push(format!("{m}"));
            row.push(format!("{iqr}"));
        }
        stats.write_record(&row)?;
    }
    stats.flush().map_err(|source| CliError::Write { path: dir.join("stats.csv"), source })?;
    Ok(())
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = RunConfig::try_from(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            if report.exit_code == 2 {
                eprintln!(
                    "time budget exhausted: {} proven-efficient points written, front incomplete",
                    report.outcome.front.len()
                );
            }
            report.exit_code
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = io::stderr().flush();
            1
        }
    }
}
