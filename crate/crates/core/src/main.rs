use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sunny::eval::{self, Approach, EvalSettings};
use sunny::kb::{self, KnowledgeBase, ScalingParams, SolverId};
use sunny::runner::{self, SolversConfig};
use sunny::sunny::{build_schedule, Schedule, ScheduleDocument, SunnyConfig};
use sunny::synth::{self, SyntheticParams};
use sunny::{time, Error, Result};

/// Exit status when `run` ends without a solution.
const EXIT_UNSOLVED: u8 = 1;
/// Exit status for invalid input files, configuration, or I/O failures.
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "sunny", version, about = "Lazy k-NN solver portfolio scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the schedule for one or more query feature vectors.
    Schedule(ScheduleArgs),
    /// Cross-validated simulation of SUNNY and baselines.
    Evaluate(EvaluateArgs),
    /// Evaluate SUNNY over a grid of portfolio sizes and k values.
    Sweep(SweepArgs),
    /// Execute a schedule with real solver processes.
    Run(RunArgs),
    /// Write a synthetic knowledge base with planted clusters.
    GenSynthetic(GenArgs),
}

#[derive(Args)]
struct KbArgs {
    /// Features table: instance,f1,...,fD[,feat_time]
    #[arg(long)]
    features: PathBuf,
    /// Runtimes table: instance,solver,time,solved
    #[arg(long)]
    runtimes: PathBuf,
    /// Solving timeout T in seconds.
    #[arg(long, default_value_t = 1800.0)]
    timeout: f64,
}

impl KbArgs {
    fn load(&self) -> Result<KnowledgeBase> {
        KnowledgeBase::load(&self.features, &self.runtimes, time::seconds_to_ms(self.timeout)?)
    }
}

#[derive(Args)]
struct QueryArgs {
    /// Raw query feature vector, comma-separated.
    #[arg(long, conflicts_with = "query_file", allow_hyphen_values = true)]
    query: Option<String>,
    /// Features table of query instances (same layout as --features).
    #[arg(long)]
    query_file: Option<PathBuf>,
}

#[derive(Args)]
struct SunnyArgs {
    /// Neighborhood size.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Backup solver; defaults to the solver solving the most KB instances.
    #[arg(long)]
    backup: Option<String>,
    /// Comma-separated portfolio; defaults to every KB solver.
    #[arg(long, value_delimiter = ',')]
    portfolio: Option<Vec<String>>,
}

impl SunnyArgs {
    fn config(&self, kb: &KnowledgeBase) -> Result<SunnyConfig> {
        let portfolio: Vec<SolverId> = match &self.portfolio {
            Some(p) => p.iter().map(|s| SolverId::new(s.trim())).collect(),
            None => kb.solvers().to_vec(),
        };
        for s in &portfolio {
            kb.solver_index(s.as_str())?;
        }
        let backup = match &self.backup {
            Some(b) => SolverId::new(b.trim()),
            None => eval::elect_backup(kb, &portfolio)?,
        };
        let config = SunnyConfig { k: self.k as usize, timeout_ms: kb.timeout_ms(), backup, portfolio };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    sunny: SunnyArgs,
    /// Write the document here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FoldArgs {
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for fold cells.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[command(flatten)]
    folds: FoldArgs,
    /// Comma-separated approaches: SUNNY, VBS, SBS, KNN, EQU.
    #[arg(long, value_delimiter = ',', default_value = "SUNNY,VBS,SBS,KNN,EQU")]
    approaches: Vec<String>,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Use the composed portfolio of this size.
    #[arg(long, conflicts_with = "portfolio")]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    portfolio: Option<Vec<String>>,
    /// Fixed backup solver; elected on each training set when omitted.
    #[arg(long)]
    backup: Option<String>,
    /// Directory for per-approach reports; the combined table goes to
    /// standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[command(flatten)]
    folds: FoldArgs,
    /// Portfolio sizes, e.g. `2..11` or `2,4,6`; defaults to all solvers.
    #[arg(long)]
    m_range: Option<String>,
    #[arg(long, default_value = "1..20")]
    k_range: String,
    #[arg(long)]
    backup: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML mapping solver name to command and success marker.
    #[arg(long)]
    solvers_config: PathBuf,
    /// Problem instance handed to each solver command.
    #[arg(long)]
    instance: PathBuf,
    /// Schedule document produced by `schedule`.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// KB used to compute the schedule (with --query) and the fallback order.
    #[arg(long, requires = "runtimes")]
    features: Option<PathBuf>,
    #[arg(long, requires = "features")]
    runtimes: Option<PathBuf>,
    /// Timeout in seconds; defaults to the schedule's.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    query: Option<String>,
    #[command(flatten)]
    sunny: SunnyArgs,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 4)]
    solvers: usize,
    /// Feature columns, constant ones included.
    #[arg(long, default_value_t = 8)]
    dims: usize,
    #[arg(long, default_value_t = 0)]
    constant_features: usize,
    #[arg(long, default_value_t = 0.15)]
    noise: f64,
    #[arg(long, default_value_t = 1800.0)]
    timeout: f64,
    /// Chance that a non-planted solver times out.
    #[arg(long, default_value_t = 0.7)]
    timeout_probability: f64,
    /// Upper bound of the feature extraction cost, seconds; 0 omits it.
    #[arg(long, default_value_t = 0.0)]
    max_feature_cost: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for features.csv and runtimes.csv.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Schedule(a) => cmd_schedule(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::GenSynthetic(a) => cmd_gen_synthetic(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad query value `{v}`"))))
        .collect()
}

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad range `{text}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
        if lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        text.split(',').map(num).collect()
    }
}

#[derive(Serialize)]
struct NamedSchedule {
    instance: String,
    schedule: ScheduleDocument,
}

fn cmd_schedule(a: ScheduleArgs) -> Result<ExitCode> {
    let kb = a.kb.load()?;
    let config = a.sunny.config(&kb)?;
    let params = ScalingParams::fit_all(&kb)?;
    let doc = match (&a.query.query, &a.query.query_file) {
        (Some(q), _) => {
            let raw = parse_vector(q)?;
            build_schedule(&params.apply(&raw)?, &config, &kb, &params)?.to_json()
        }
        (None, Some(path)) => {
            let file = fs::File::open(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            let (names, rows) = kb::read_features(file)?;
            if names.len() != kb.dimension() {
                return Err(Error::DimensionMismatch { expected: kb.dimension(), found: names.len() });
            }
            let docs = rows
                .into_iter()
                .map(|row| {
                    let s = build_schedule(&params.apply(&row.values)?, &config, &kb, &params)?;
                    Ok(NamedSchedule { instance: row.instance.to_string(), schedule: s.to_document() })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut s = serde_json::to_string_pretty(&docs).expect("schedules serialize");
            s.push('\n');
            s
        }
        (None, None) => return Err(Error::InvalidConfig("one of --query or --query-file is required".into())),
    };
    emit(a.out.as_deref(), &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn base_settings(kb: &KnowledgeBase, k: u64, backup: Option<&String>, jobs: u64) -> EvalSettings {
    EvalSettings {
        backup: backup.map(|b| SolverId::new(b.trim())),
        jobs: jobs as usize,
        ..EvalSettings::new(kb, k as usize)
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<ExitCode> {
    let approaches = a.approaches.iter().map(|s| s.parse()).collect::<Result<Vec<Approach>>>()?;
    let kb = a.kb.load()?;
    let mut settings = base_settings(&kb, a.k, a.backup.as_ref(), a.folds.jobs);
    if let Some(m) = a.m {
        settings.portfolio = eval::compose_portfolio(&kb, m)?.solvers;
    } else if let Some(p) = &a.portfolio {
        settings.portfolio = p.iter().map(|s| SolverId::new(s.trim())).collect();
    }
    let plan = eval::make_folds(&kb, a.folds.repeats, a.folds.folds, a.folds.seed)?;
    let reports = approaches.iter().map(|&ap| eval::evaluate(ap, &kb, &settings, &plan)).collect::<Result<Vec<_>>>()?;

    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
            for r in &reports {
                let stem = r.approach.to_lowercase();
                write_file(&dir.join(format!("{stem}.csv")), &r.to_csv())?;
                write_file(&dir.join(format!("{stem}.json")), &r.to_json())?;
            }
            write_file(&dir.join("comparison.csv"), &eval::comparison_csv(&reports))?;
            for r in &reports {
                let m = r.overall();
                eprintln!("{:<6} PSI {:>8.3}%  AST {:>10.3}s", r.approach, m.psi, m.ast);
            }
        }
        None => print!("{}", eval::combined_csv(&reports)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode> {
    let kb = a.kb.load()?;
    let m_range = match &a.m_range {
        Some(r) => parse_range(r)?,
        None => vec![kb.num_solvers()],
    };
    let k_range = parse_range(&a.k_range)?;
    if k_range.contains(&0) {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let plan = eval::make_folds(&kb, a.folds.repeats, a.folds.folds, a.folds.seed)?;
    let base = base_settings(&kb, 1, a.backup.as_ref(), a.folds.jobs);
    let table = eval::sweep_k(&kb, &m_range, &k_range, &plan, &base)?;
    emit(a.out.as_deref(), &table.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let commands = SolversConfig::load(&a.solvers_config)?;
    let kb = match (&a.features, &a.runtimes) {
        (Some(f), Some(r)) => {
            let timeout = time::seconds_to_ms(a.timeout.unwrap_or(1800.0))?;
            Some(KnowledgeBase::load(f, r, timeout)?)
        }
        _ => None,
    };
    let schedule = match (&a.schedule, &a.query, &kb) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            Schedule::from_json(&text)?
        }
        (None, Some(q), Some(kb)) => {
            let params = ScalingParams::fit_all(kb)?;
            let config = a.sunny.config(kb)?;
            build_schedule(&params.apply(&parse_vector(q)?)?, &config, kb, &params)?
        }
        _ => return Err(Error::InvalidConfig("give --schedule, or --features/--runtimes with --query".into())),
    };
    let timeout_ms = match a.timeout {
        Some(t) => time::seconds_to_ms(t)?,
        None => schedule.timeout_ms,
    };

    let configured = commands.solvers();
    let fallback = match &kb {
        Some(kb) => {
            let known: Vec<SolverId> =
                configured.iter().filter(|s| kb.solver_index(s.as_str()).is_ok()).cloned().collect();
            let mut order = runner::fallback_order(kb, &known)?;
            order.extend(configured.iter().filter(|s| !known.contains(s)).cloned());
            order
        }
        None => configured,
    };

    let trace = runner::execute_schedule(&schedule, &a.instance, &commands, &fallback, timeout_ms)?;
    emit(a.out.as_deref(), &trace.to_json())?;
    Ok(if trace.solved { ExitCode::SUCCESS } else { ExitCode::from(EXIT_UNSOLVED) })
}

fn cmd_gen_synthetic(a: GenArgs) -> Result<ExitCode> {
    let params = SyntheticParams {
        clusters: a.clusters,
        instances: a.instances,
        solvers: a.solvers,
        features: a.dims,
        constant_features: a.constant_features,
        noise: a.noise,
        timeout_ms: time::seconds_to_ms(a.timeout)?,
        timeout_probability: a.timeout_probability,
        max_feature_cost_ms: time::seconds_to_ms(a.max_feature_cost)?,
        seed: a.seed,
    };
    let kb = synth::generate(&params)?;
    fs::create_dir_all(&a.out).map_err(|source| Error::Io { path: a.out.clone(), source })?;
    write_file(&a.out.join("features.csv"), &kb.to_features_csv())?;
    write_file(&a.out.join("runtimes.csv"), &kb.to_runtimes_csv())?;
    eprintln!("wrote {} instances x {} solvers to {}", kb.num_instances(), kb.num_solvers(), a.out.display());
    Ok(ExitCode::SUCCESS)
}
