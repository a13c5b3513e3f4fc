//! The `rmdpq` command line.
//!
//! Every run prints exactly one JSON document on stdout and sends
//! diagnostics to stderr. Exit codes: 0 success, 1 disagreement or failed
//! verification, 2 timeout, 64 bad flags, 65 invalid input, 66 support cap
//! exceeded.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{gen_frozen_lake, FrozenLakeSpec, LakeObjective};
use crate::error::Error;
use crate::io::{self, ExplicitUncertainty};
use crate::model::{validate, MemorylessPolicy, Norm, Rmdp};
use crate::oracle::{Backend, Oracle, OracleStats, DEFAULT_SUPPORT_CAP, DEFAULT_TOLERANCE};
use crate::rational::{self, Rational};
use crate::reference;
use crate::set::StateSet;
use crate::solver::{self, Objective, ParityAlgorithm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISAGREE: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INVALID: i32 = 65;
pub const EXIT_CAP: i32 = 66;

#[derive(Parser, Debug)]
#[command(name = "rmdpq", version, about = "Almost-sure analysis of robust MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one model, or every model in a directory.
    Solve(SolveArgs),
    /// Generate a benchmark model.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compare the solver with the support-game reference on a small model.
    Check(CheckArgs),
    /// Check that a policy wins from every state it is defined on.
    Verify(VerifyArgs),
    /// Convert explicit transition and label files into a model file.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
struct ObjectiveArgs {
    /// `reach:<label>` or `parity`.
    #[arg(long)]
    objective: String,
    /// Use the quasi-polynomial parity algorithm.
    #[arg(long)]
    efficient: bool,
    #[arg(long, value_enum, default_value_t = Arith::Exact)]
    arith: Arith,
    /// Zero tolerance of the float backend.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, required_unless_present = "models_dir", conflicts_with = "models_dir")]
    model: Option<PathBuf>,
    /// Solve every `*.json` model in this directory.
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Write the synthesized policy here.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Omit wall-clock times so that output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Worker threads for directory mode (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Slippery grid world with holes.
    Frozenlake(LakeArgs),
}

#[derive(Args, Debug)]
struct LakeArgs {
    #[arg(long)]
    n: usize,
    /// Norm: 1, 2, any positive integer, or inf.
    #[arg(long, default_value = "1")]
    p: String,
    /// Largest radius, as a decimal or p/q.
    #[arg(long, default_value = "1")]
    rmax: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LakeKind::Reach)]
    objective: LakeKind,
    /// Fraction of hole cells, as a decimal or p/q.
    #[arg(long, default_value = "1/10")]
    hole_density: String,
    /// Let the environment move mass outside the nominal support.
    #[arg(long)]
    unrestricted: bool,
    /// Give every state the radius `rmax`.
    #[arg(long)]
    constant_radius: bool,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Largest face whose supports are enumerated.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
    support_cap: usize,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    policy: PathBuf,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    tra: PathBuf,
    #[arg(long)]
    lab: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: ExplicitFamily,
    /// Uniform radius, as a decimal or p/q.
    #[arg(long)]
    radius: String,
    #[arg(long)]
    unrestricted: bool,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Arith {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LakeKind {
    Reach,
    Parity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExplicitFamily {
    L1,
    L2,
    Linf,
}

/// Oracle work of a run.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCounts {
    pub force_calls: u64,
    pub force_agent: u64,
    pub force_env: u64,
    pub face_feasible: u64,
    pub can_hit: u64,
    pub lp_solves: u64,
}

impl From<OracleStats> for OracleCounts {
    fn from(s: OracleStats) -> Self {
        OracleCounts {
            force_calls: s.force_calls(),
            force_agent: s.force_agent,
            force_env: s.force_env,
            face_feasible: s.face_feasible,
            can_hit: s.can_hit,
            lp_solves: s.lp_solves,
        }
    }
}

/// Outcome of `solve`, `check` and `verify`. Fields serialize in
/// declaration order; the optional tail is present only where it applies.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub winning: Vec<String>,
    pub policy: Option<BTreeMap<String, String>>,
    pub iterations: u32,
    pub trace: Vec<Vec<String>>,
    pub oracle: OracleCounts,
    pub wall_time_ms: Option<f64>,
    pub arith: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_winning: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub differing: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
struct FileReport {
    command: Vec<String>,
    output: String,
    states: usize,
    live: usize,
    actions: usize,
}

#[derive(Debug, Clone, Serialize)]
struct BatchRun {
    file: String,
    configuration: String,
    status: &'static str,
    winning: Option<usize>,
    iterations: Option<u32>,
    force_calls: Option<u64>,
    wall_time_ms: Option<f64>,
    error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct BatchGroup {
    configuration: String,
    count: usize,
    solved: usize,
    timeouts: usize,
    errors: usize,
    avg_time_ms: Option<f64>,
    avg_winning: Option<f64>,
    avg_force_calls: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct BatchReport {
    command: Vec<String>,
    arith: &'static str,
    configurations: Vec<BatchGroup>,
    runs: Vec<BatchRun>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Timeout => EXIT_TIMEOUT,
            Error::SupportCapExceeded { .. } => EXIT_CAP,
            Error::InvalidSpec(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(echo, a, stderr),
        Command::Gen(GenCommand::Frozenlake(a)) => cmd_gen(echo, a),
        Command::Check(a) => cmd_check(echo, a),
        Command::Verify(a) => cmd_verify(echo, a),
        Command::Ingest(a) => cmd_ingest(echo, a),
    };
    match outcome {
        Ok((json, code)) => {
            let _ = writeln!(stdout, "{json}");
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "rmdpq: {}", f.message);
            f.code
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn parse_rational(flag: &str, text: &str) -> std::result::Result<Rational, Failure> {
    rational::parse(text).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn backend(args: &ObjectiveArgs) -> std::result::Result<Backend, Failure> {
    match args.arith {
        Arith::Exact => Ok(Backend::Exact),
        Arith::Float if args.tol >= 0.0 && args.tol.is_finite() => Ok(Backend::Float { tolerance: args.tol }),
        Arith::Float => Err(usage("--tol must be a finite non-negative number")),
    }
}

fn oracle(args: &ObjectiveArgs) -> std::result::Result<Oracle, Failure> {
    let deadline = match args.timeout {
        Some(t) if t >= 0.0 && t.is_finite() => Some(Instant::now() + Duration::from_secs_f64(t)),
        Some(_) => return Err(usage("--timeout must be a non-negative number of seconds")),
        None => None,
    };
    Ok(Oracle::new(backend(args)?).with_deadline(deadline))
}

enum ObjectiveSpec {
    Reach(String),
    Parity,
}

fn objective_spec(text: &str) -> std::result::Result<ObjectiveSpec, Failure> {
    if text == "parity" {
        Ok(ObjectiveSpec::Parity)
    } else if let Some(label) = text.strip_prefix("reach:").filter(|l| !l.is_empty()) {
        Ok(ObjectiveSpec::Reach(label.to_string()))
    } else {
        Err(usage(format!("--objective must be reach:<label> or parity, got {text:?}")))
    }
}

fn objective_for(model: &Rmdp, spec: &ObjectiveSpec) -> crate::Result<Objective> {
    match spec {
        ObjectiveSpec::Reach(label) => {
            let target = model
                .label(label)
                .ok_or_else(|| Error::InvalidModel(format!("no label {label:?}")))?
                .intersection(model.live());
            Ok(Objective::Reach(target))
        }
        ObjectiveSpec::Parity => {
            if model.priorities().is_none() {
                return Err(Error::MissingPriorities);
            }
            Ok(Objective::Parity)
        }
    }
}

fn load_valid(path: &Path) -> crate::Result<Rmdp> {
    let model = io::load_model(path)?;
    let problems = validate(&model);
    if let Some(first) = problems.first() {
        let more = if problems.len() > 1 {
            format!(" (and {} more)", problems.len() - 1)
        } else {
            String::new()
        };
        return Err(Error::InvalidModel(format!("{}{more}", first)));
    }
    Ok(model)
}

fn algorithm(args: &ObjectiveArgs) -> ParityAlgorithm {
    if args.efficient {
        ParityAlgorithm::Efficient
    } else {
        ParityAlgorithm::Standard
    }
}

fn policy_names(model: &Rmdp, policy: &MemorylessPolicy) -> BTreeMap<String, String> {
    policy
        .iter()
        .map(|(s, a)| (model.state_name(s).to_string(), model.action_name(a).to_string()))
        .collect()
}

fn elapsed_ms(start: Instant, timing: bool) -> Option<f64> {
    timing.then(|| (start.elapsed().as_secs_f64() * 1e6).round() / 1e3)
}

fn base_report(command: Vec<String>, model: &Rmdp, result: &solver::SolveResult, arith: &'static str) -> RunReport {
    let mut stats = result.stats;
    if let Some(extra) = &result.policy_stats {
        stats.add(extra);
    }
    RunReport {
        command,
        winning: model.names_of(&result.winning),
        policy: Some(policy_names(model, &result.policy)),
        iterations: result.iterations,
        trace: result.trace.iter().map(|z| model.names_of(z)).collect(),
        oracle: stats.into(),
        wall_time_ms: None,
        arith,
        agree: None,
        reference_winning: None,
        differing: None,
        verified: None,
    }
}

fn cmd_solve(command: Vec<String>, args: SolveArgs, stderr: &mut dyn Write) -> Outcome {
    let spec = objective_spec(&args.objective.objective)?;
    if let Some(dir) = &args.models_dir {
        if args.policy.is_some() {
            return Err(usage("--policy cannot be combined with --models-dir"));
        }
        return cmd_batch(command, &args, dir, &spec, stderr);
    }
    let path = args.model.as_ref().expect("clap requires --model or --models-dir");
    let model = load_valid(path)?;
    let objective = objective_for(&model, &spec)?;
    let mut oracle = oracle(&args.objective)?;
    let start = Instant::now();
    let result = solver::solve(&model, &objective, algorithm(&args.objective), &mut oracle)?;
    let wall = elapsed_ms(start, !args.no_timing);
    if let Some(out) = &args.policy {
        io::save_policy(&model, &result.policy, out)?;
    }
    let mut report = base_report(command, &model, &result, oracle.backend().name());
    report.wall_time_ms = wall;
    Ok((to_json(&report), EXIT_OK))
}

/// Files `<config>-<rest>.json` are grouped under `<config>`; a stem
/// without `-` forms its own group.
fn configuration_of(stem: &str) -> String {
    match stem.rfind('-') {
        Some(i) if i > 0 => stem[..i].to_string(),
        _ => stem.to_string(),
    }
}

fn cmd_batch(command: Vec<String>, args: &SolveArgs, dir: &Path, spec: &ObjectiveSpec, stderr: &mut dyn Write) -> Outcome {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let backend = backend(&args.objective)?;
    if let Some(t) = args.objective.timeout {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(usage("--timeout must be a non-negative number of seconds"));
        }
    }
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let algorithm = algorithm(&args.objective);
    let timing = !args.no_timing;

    let solve_one = |path: &PathBuf| -> BatchRun {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut run = BatchRun {
            file: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            configuration: configuration_of(&stem),
            status: "solved",
            winning: None,
            iterations: None,
            force_calls: None,
            wall_time_ms: None,
            error: None,
        };
        let deadline = args.objective.timeout.map(|t| Instant::now() + Duration::from_secs_f64(t));
        let mut oracle = Oracle::new(backend).with_deadline(deadline);
        let start = Instant::now();
        let outcome = load_valid(path)
            .and_then(|m| objective_for(&m, spec).map(|o| (m, o)))
            .and_then(|(m, o)| solver::solve(&m, &o, algorithm, &mut oracle));
        match outcome {
            Ok(r) => {
                run.winning = Some(r.winning.len());
                run.iterations = Some(r.iterations);
                run.force_calls = Some(r.stats.force_calls());
                run.wall_time_ms = elapsed_ms(start, timing);
            }
            Err(Error::Timeout) => run.status = "timeout",
            Err(e) => {
                run.status = "error";
                run.error = Some(e.to_string());
            }
        }
        run
    };

    let mut runs: Vec<Option<BatchRun>> = vec![None; files.len()];
    let chunk = files.len().div_ceil(jobs).max(1);
    std::thread::scope(|scope| {
        for (slots, paths) in runs.chunks_mut(chunk).zip(files.chunks(chunk)) {
            let solve_one = &solve_one;
            scope.spawn(move || {
                for (slot, path) in slots.iter_mut().zip(paths) {
                    *slot = Some(solve_one(path));
                }
            });
        }
    });
    let runs: Vec<BatchRun> = runs.into_iter().map(|r| r.expect("every file is solved")).collect();
    for r in runs.iter().filter(|r| r.status == "error") {
        let _ = writeln!(stderr, "rmdpq: {}: {}", r.file, r.error.as_deref().unwrap_or(""));
    }

    let mut groups: BTreeMap<String, Vec<&BatchRun>> = BTreeMap::new();
    for r in &runs {
        groups.entry(r.configuration.clone()).or_default().push(r);
    }
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let configurations = groups
        .into_iter()
        .map(|(configuration, rs)| {
            let solved: Vec<&&BatchRun> = rs.iter().filter(|r| r.status == "solved").collect();
            BatchGroup {
                configuration,
                count: rs.len(),
                solved: solved.len(),
                timeouts: rs.iter().filter(|r| r.status == "timeout").count(),
                errors: rs.iter().filter(|r| r.status == "error").count(),
                avg_time_ms: if timing {
                    mean(solved.iter().filter_map(|r| r.wall_time_ms).collect())
                } else {
                    None
                },
                avg_winning: mean(solved.iter().filter_map(|r| r.winning).map(|w| w as f64).collect()),
                avg_force_calls: mean(solved.iter().filter_map(|r| r.force_calls).map(|c| c as f64).collect()),
            }
        })
        .collect();
    let report = BatchReport {
        command,
        arith: backend.name(),
        configurations,
        runs,
    };
    Ok((to_json(&report), EXIT_OK))
}

fn cmd_gen(command: Vec<String>, args: LakeArgs) -> Outcome {
    let norm = Norm::parse(&args.p).ok_or_else(|| usage(format!("--p: unknown norm {:?}", args.p)))?;
    let objective = match args.objective {
        LakeKind::Reach => LakeObjective::Reach,
        LakeKind::Parity => LakeObjective::Parity,
    };
    let mut spec = FrozenLakeSpec::new(args.n, norm, parse_rational("rmax", &args.rmax)?, args.seed, objective);
    spec.hole_density = parse_rational("hole-density", &args.hole_density)?;
    spec.support_restricted = !args.unrestricted;
    spec.constant_radius = args.constant_radius;
    let model = gen_frozen_lake(&spec)?;
    io::save_model(&model, &args.output)?;
    Ok((to_json(&file_report(command, &args.output, &model)), EXIT_OK))
}

fn file_report(command: Vec<String>, output: &Path, model: &Rmdp) -> FileReport {
    FileReport {
        command,
        output: output.display().to_string(),
        states: model.num_states(),
        live: model.num_live(),
        actions: model.action_names().len(),
    }
}

fn cmd_ingest(command: Vec<String>, args: IngestArgs) -> Outcome {
    let uncertainty = ExplicitUncertainty {
        norm: match args.family {
            ExplicitFamily::L1 => Norm::P(1),
            ExplicitFamily::L2 => Norm::P(2),
            ExplicitFamily::Linf => Norm::Inf,
        },
        radius: parse_rational("radius", &args.radius)?,
        support_restricted: !args.unrestricted,
    };
    if uncertainty.radius < Rational::from_integer(0.into()) {
        return Err(usage("--radius must be non-negative"));
    }
    let model = io::ingest_explicit(&args.tra, args.lab.as_deref(), &uncertainty)?;
    let problems = validate(&model);
    if let Some(first) = problems.first() {
        return Err(Error::InvalidModel(first.to_string()).into());
    }
    io::save_model(&model, &args.output)?;
    Ok((to_json(&file_report(command, &args.output, &model)), EXIT_OK))
}

fn symmetric_difference(a: &StateSet, b: &StateSet) -> StateSet {
    a.difference(b).union(&b.difference(a))
}

fn cmd_check(command: Vec<String>, args: CheckArgs) -> Outcome {
    let spec = objective_spec(&args.objective.objective)?;
    let model = load_valid(&args.model)?;
    let objective = objective_for(&model, &spec)?;
    let mut oracle = oracle(&args.objective)?.with_support_cap(args.support_cap);
    let start = Instant::now();
    let game = reference::reduce(&model, &mut oracle)?;
    let result = solver::solve(&model, &objective, algorithm(&args.objective), &mut oracle)?;
    let expected = match &objective {
        Objective::Reach(t) => reference::game_as_reach(&game, t),
        Objective::Parity => reference::game_as_parity(&game),
    };
    let wall = elapsed_ms(start, !args.no_timing);
    let diff = symmetric_difference(&result.winning, &expected);
    let mut report = base_report(command, &model, &result, oracle.backend().name());
    report.wall_time_ms = wall;
    report.agree = Some(diff.is_empty());
    report.reference_winning = Some(model.names_of(&expected));
    report.differing = Some(model.names_of(&diff));
    let code = if diff.is_empty() { EXIT_OK } else { EXIT_DISAGREE };
    Ok((to_json(&report), code))
}

fn cmd_verify(command: Vec<String>, args: VerifyArgs) -> Outcome {
    let spec = objective_spec(&args.objective.objective)?;
    let model = load_valid(&args.model)?;
    let objective = objective_for(&model, &spec)?;
    let policy = io::load_policy(&model, &args.policy)?;
    let mut oracle = oracle(&args.objective)?;
    let start = Instant::now();
    let induced = model.induced_by(&policy)?;
    let result = solver::solve(&induced, &objective, ParityAlgorithm::Standard, &mut oracle)?;
    let verified = policy.domain(model.num_states()).is_subset(&result.winning);
    let mut report = base_report(command, &model, &result, oracle.backend().name());
    report.policy = Some(policy_names(&model, &policy));
    report.wall_time_ms = elapsed_ms(start, !args.no_timing);
    report.verified = Some(verified);
    Ok((to_json(&report), if verified { EXIT_OK } else { EXIT_DISAGREE }))
}
