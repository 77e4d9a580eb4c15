use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use dhsynth::bench::{self, graph_heuristic, pddl_heuristic, Executor, HeuristicSpec, RunSpec};
use dhsynth::heuristics::EvalError;
use dhsynth::repair::{self, BuiltinRunner, FeedbackMode, ProcessRunner, RepairConfig, RepairResult, TaskText, Templates};
use dhsynth::search::{gbfs, hill_climb, Limits, Outcome, SearchResult};
use dhsynth::synth::{MockSynthesizer, RemoteSynthesizer, SynthError, Synthesizer, SynthesizerConfig};
use dhsynth::validator::{check_direct, check_direct_suite, oracle_dda, oracle_direct, OracleVerdict, TaskStatus, Verdict};
use dhsynth::candidate_runtime::RuntimeLimits;
use dhsynth::{pddl, ExplicitGraph, GroundTask, TransitionSystem};

#[derive(Parser)]
#[command(name = "dhsynth", version, about = "Ground, search, validate and synthesize heuristics for PDDL tasks")]
struct Cli {
    /// More output on stderr; -vvv logs every expansion.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Hc,
    Gbfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Direct,
    Dda,
}

#[derive(clap::Args)]
struct HeuristicArgs {
    /// ff, goal-count, blind, table, or candidate:<file>.
    #[arg(long, default_value = "ff")]
    heuristic: String,
    /// Command running candidate files, e.g. "python3 -m dhsynth_sdk {code_file}".
    #[arg(long)]
    runner: Option<String>,
}

impl HeuristicArgs {
    fn spec(&self) -> HeuristicSpec {
        match self.heuristic.strip_prefix("candidate:") {
            Some(file) => HeuristicSpec::Candidate {
                candidate: file.into(),
                runner: self.runner.as_ref().map(|r| r.split_whitespace().map(String::from).collect()),
                name: None,
            },
            None => HeuristicSpec::Builtin(self.heuristic.clone()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and ground a task, print its size.
    Parse { domain: PathBuf, task: PathBuf },
    /// Run hill climbing or GBFS on one task (DOMAIN TASK, or GRAPH.json).
    Solve {
        #[arg(long, value_enum, default_value = "hc")]
        algo: Algo,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        /// Seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long)]
        max_expansions: Option<u64>,
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
    },
    /// Check the direct property on tasks in order, stopping at the first
    /// counterexample (DOMAIN TASK..., or GRAPH.json).
    Validate {
        #[command(flatten)]
        heuristic: HeuristicArgs,
        /// Seconds per task.
        #[arg(long, default_value_t = 30.0)]
        time_limit: f64,
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
    /// Run the repair loop described by a JSON config.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite described by a JSON file.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        /// Report directory; defaults to bench-<suite>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run records on threads instead of supervised worker processes.
        #[arg(long)]
        in_process: bool,
    },
    /// Exact verdict by exhaustive enumeration (DOMAIN TASK, or GRAPH.json).
    Oracle {
        #[arg(long, value_enum)]
        property: Property,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
    },
    #[command(hide = true)]
    BenchWorker,
}

/// Bad arguments or unusable input files: exit code 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn secs(v: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(v).map_err(|_| usage(format!("invalid time limit {v}")))
}

enum Input {
    Graph(String, ExplicitGraph),
    Pddl { domain_text: String, tasks: Vec<(String, String, GroundTask)> },
}

fn task_id(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn load_input(inputs: &[PathBuf]) -> Result<Input> {
    match inputs {
        [graph] if graph.extension().is_some_and(|e| e == "json") => {
            ExplicitGraph::from_json(&read(graph)?).map(|g| Input::Graph(task_id(graph), g)).map_err(|e| usage(format!("{}: {e}", graph.display())))
        }
        [_] => Err(usage("expected DOMAIN TASK... or a graph .json file")),
        [domain, tasks @ ..] => {
            let domain_text = read(domain)?;
            let mut loaded = Vec::new();
            for t in tasks {
                let text = read(t)?;
                let task = pddl::load(&domain_text, &text).map_err(|e| usage(format!("{}: {e}", t.display())))?;
                loaded.push((task_id(t), text, task));
            }
            Ok(Input::Pddl { domain_text, tasks: loaded })
        }
        [] => Err(usage("no input files")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Parse { domain, task } => cmd_parse(&domain, &task),
        Command::Solve { algo, heuristic, time_limit, max_expansions, inputs } => {
            let mut limits = Limits::time(secs(time_limit)?);
            limits.max_expansions = max_expansions;
            cmd_solve(algo, &heuristic.spec(), limits, &inputs)
        }
        Command::Validate { heuristic, time_limit, inputs } => cmd_validate(&heuristic.spec(), secs(time_limit)?, &inputs),
        Command::Synthesize { config, out } => cmd_synthesize(&config, out),
        Command::Bench { spec, out, in_process } => cmd_bench(&spec, out, in_process),
        Command::Oracle { property, heuristic, max_states, inputs } => cmd_oracle(property, &heuristic.spec(), max_states, &inputs),
        Command::BenchWorker => {
            bench::worker_main(std::io::stdin().lock(), std::io::stdout().lock()).context("bench worker")?;
            Ok(0)
        }
    }
}

fn cmd_parse(domain: &Path, task: &Path) -> Result<u8> {
    let domain_text = read(domain)?;
    let task_text = read(task)?;
    let t = pddl::load(&domain_text, &task_text).map_err(|e| usage(format!("{}: {e}", task.display())))?;
    println!("task {}", t.name());
    println!("facts: {}", t.num_facts());
    println!("actions: {}", t.actions().len());
    println!("initial facts: {}", t.initial_state().len());
    println!("goal facts: {}", t.goal().len());
    Ok(0)
}

fn single_task(tasks: Vec<(String, String, GroundTask)>) -> Result<(String, String, GroundTask)> {
    let mut tasks = tasks;
    match tasks.len() {
        1 => Ok(tasks.remove(0)),
        _ => Err(usage("expected exactly one task")),
    }
}

fn report_search<S>(result: &SearchResult<S>) -> u8 {
    let s = &result.stats;
    let stats = format!(
        "expansions {}, generated {}, evaluations {}, time {} ms",
        s.expansions,
        s.generated,
        s.evaluations,
        s.wall_time.as_millis()
    );
    match &result.outcome {
        Outcome::Plan(plan) => {
            for a in plan {
                println!("{a}");
            }
            println!("; plan length {}, {stats}", plan.len());
            0
        }
        Outcome::Stuck { h, successors, .. } => {
            println!("stuck at a state with h = {h}; no successor improves:");
            for (a, v) in successors {
                println!("  {a}: {v}");
            }
            println!("; {stats}");
            1
        }
        Outcome::HeuristicFailure(e) => {
            println!("error(heuristic): {}", e.message);
            if let Some(tail) = &e.stderr_tail {
                eprintln!("{tail}");
            }
            println!("; {stats}");
            1
        }
        other => {
            println!("{}", other.label());
            println!("; {stats}");
            1
        }
    }
}

fn cmd_solve(algo: Algo, spec: &HeuristicSpec, limits: Limits, inputs: &[PathBuf]) -> Result<u8> {
    fn go<T: TransitionSystem, H: dhsynth::Heuristic<T::State> + ?Sized>(algo: Algo, ts: &T, h: &H, limits: Limits) -> u8 {
        match algo {
            Algo::Hc => report_search(&hill_climb(ts, h, limits)),
            Algo::Gbfs => report_search(&gbfs(ts, h, limits)),
        }
    }
    match load_input(inputs)? {
        Input::Graph(_, g) => {
            let h = graph_heuristic(spec, &g).map_err(|e| usage(e.message))?;
            Ok(go(algo, &g, &*h, limits))
        }
        Input::Pddl { domain_text, tasks } => {
            let (_, text, task) = single_task(tasks)?;
            let h = pddl_heuristic(spec, &task, &domain_text, &text, None).map_err(|e| usage(e.message))?;
            Ok(go(algo, &task, &*h, limits))
        }
    }
}

fn cmd_validate(spec: &HeuristicSpec, limit: Duration, inputs: &[PathBuf]) -> Result<u8> {
    if limit.is_zero() {
        return Err(usage("--time-limit must be positive"));
    }
    let status = match load_input(inputs)? {
        Input::Graph(id, g) => {
            let h = graph_heuristic(spec, &g).map_err(|e| usage(e.message))?;
            let outcome = check_direct(&g, &*h, limit, &id);
            match outcome {
                Ok(o) => match o.verdict {
                    Verdict::Pass { states_checked } => TaskStatus::Pass { states_checked },
                    Verdict::PresumedPass { states_checked } => TaskStatus::PresumedPass { states_checked },
                    Verdict::Fail(cx) => TaskStatus::Fail(cx),
                },
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(1);
                }
            }
        }
        Input::Pddl { domain_text, tasks } => {
            let suite: Vec<(String, GroundTask)> = tasks.iter().map(|(id, _, t)| (id.clone(), t.clone())).collect();
            let text_of = |id: &str| tasks.iter().find(|(i, _, _)| i == id).map(|(_, text, _)| text.as_str()).unwrap_or("");
            let result = check_direct_suite(
                &suite,
                |id, task| pddl_heuristic(spec, task, &domain_text, text_of(id), None).map_err(|e| EvalError::new(e.message)),
                limit,
            );
            let outcome = match result {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(1);
                }
            };
            for e in &outcome.entries {
                let label = match &e.status {
                    TaskStatus::Pass { .. } => "Pass",
                    TaskStatus::PresumedPass { .. } => "PresumedPass",
                    TaskStatus::Fail(_) => "Fail",
                    TaskStatus::NotRun => "not run",
                };
                eprintln!("{}: {label} ({} evaluations)", e.task_id, e.evaluations);
            }
            if let Some(cx) = outcome.failure() {
                TaskStatus::Fail(cx.clone())
            } else if outcome.entries.iter().any(|e| matches!(e.status, TaskStatus::PresumedPass { .. })) {
                TaskStatus::PresumedPass { states_checked: 0 }
            } else {
                TaskStatus::Pass { states_checked: 0 }
            }
        }
    };
    match status {
        TaskStatus::Fail(cx) => {
            println!("{}", cx.to_json());
            Ok(1)
        }
        TaskStatus::PresumedPass { .. } => {
            println!("PresumedPass");
            Ok(0)
        }
        _ => {
            println!("Pass");
            Ok(0)
        }
    }
}

fn default_iterations() -> u32 {
    10
}

fn default_validation_secs() -> f64 {
    30.0
}

/// `synthesize --config` file. Paths are relative to it. With `responses`
/// the canned replies stand in for the model.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthesisFile {
    domain: PathBuf,
    tasks: Vec<PathBuf>,
    #[serde(default = "default_iterations")]
    max_iterations: u32,
    #[serde(default = "default_validation_secs")]
    per_task_validation_secs: f64,
    #[serde(default)]
    feedback_mode: FeedbackMode,
    #[serde(default)]
    coverage_max_expansions: Option<u64>,
    #[serde(default)]
    templates_dir: Option<PathBuf>,
    /// Candidate runner command; candidates run through their builtin
    /// directive when absent.
    #[serde(default)]
    runner: Option<Vec<String>>,
    #[serde(default)]
    synthesizer: Option<SynthesizerConfig>,
    #[serde(default)]
    responses: Option<Vec<String>>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

fn cmd_synthesize(path: &Path, out: Option<PathBuf>) -> Result<u8> {
    let file: SynthesisFile = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let domain_text = read(&base.join(&file.domain))?;
    let mut tasks = Vec::new();
    for t in &file.tasks {
        tasks.push(TaskText { id: task_id(t), text: read(&base.join(t))? });
    }
    let mut config = RepairConfig::new(domain_text, tasks);
    config.max_iterations = file.max_iterations;
    config.per_task_validation_limit = secs(file.per_task_validation_secs)?;
    config.feedback_mode = file.feedback_mode;
    config.coverage_max_expansions = file.coverage_max_expansions;
    if let Some(dir) = &file.templates_dir {
        config.templates = Templates::with_overrides(&base.join(dir)).with_context(|| format!("templates in {}", dir.display()))?;
    }
    let mut synth: Box<dyn Synthesizer> = match (file.responses, file.synthesizer) {
        (Some(responses), _) => Box::new(MockSynthesizer::new(responses)),
        (None, Some(sc)) => match RemoteSynthesizer::from_env(sc) {
            Ok(s) => Box::new(s),
            Err(e @ SynthError::MissingApiKey(_)) => return Err(usage(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        (None, None) => return Err(usage("config needs either `synthesizer` or `responses`")),
    };
    let result: RepairResult = match file.runner {
        None => repair::run_repair(&config, &mut *synth, &BuiltinRunner),
        Some(command) => {
            let runner = ProcessRunner { command, limits: RuntimeLimits::default() };
            repair::run_repair(&config, &mut *synth, &runner)
        }
    }
    .map_err(|e| match e {
        repair::RepairError::Config(_) | repair::RepairError::Pddl { .. } => usage(e.to_string()),
        e => anyhow!(e),
    })?;
    let dir = out.or(file.output_dir.map(|d| base.join(d))).unwrap_or_else(|| PathBuf::from("synthesis-out"));
    result.save(&dir)?;
    let n = result.transcript.candidates_generated();
    match result.converged() {
        Some(c) => {
            println!("converged after {n} candidate(s); candidate {}", &c.id[..12]);
            println!("wrote {}", dir.display());
            Ok(0)
        }
        None => {
            println!("no candidate passed after {n} attempt(s)");
            println!("wrote {}", dir.display());
            Ok(1)
        }
    }
}

fn cmd_bench(path: &Path, out: Option<PathBuf>, in_process: bool) -> Result<u8> {
    let spec = RunSpec::load(path).map_err(|e| usage(e.to_string()))?;
    let executor = if in_process {
        Executor::InProcess
    } else {
        let exe = std::env::current_exe().context("locating the dhsynth executable")?;
        Executor::Workers { command: vec![exe.to_string_lossy().into_owned(), "bench-worker".into()] }
    };
    let report = bench::run_suite(&spec, &executor).map_err(|e| usage(e.to_string()))?;
    let dir = out.unwrap_or_else(|| PathBuf::from(format!("bench-{}", spec.suite)));
    bench::write_report(&spec.suite, &report.records, &dir).with_context(|| format!("writing {}", dir.display()))?;
    let mut stdout = std::io::stdout().lock();
    for c in &report.summary.configs {
        writeln!(stdout, "{}+{}: solved {}/{}", c.algorithm, c.heuristic, c.solved, c.tasks)?;
    }
    writeln!(stdout, "wrote {}", dir.display())?;
    Ok(0)
}

fn cmd_oracle(property: Property, spec: &HeuristicSpec, cap: usize, inputs: &[PathBuf]) -> Result<u8> {
    fn go<T: TransitionSystem, H: dhsynth::Heuristic<T::State> + ?Sized>(
        property: Property,
        ts: &T,
        h: &H,
        cap: usize,
    ) -> Result<OracleVerdict> {
        let verdict = match property {
            Property::Direct => oracle_direct(ts, h, cap).map(|r| r.verdict),
            Property::Dda => oracle_dda(ts, h, cap),
        };
        verdict.map_err(|e| usage(e.to_string()))
    }
    let verdict = match load_input(inputs)? {
        Input::Graph(_, g) => {
            let h = graph_heuristic(spec, &g).map_err(|e| usage(e.message))?;
            go(property, &g, &*h, cap)?
        }
        Input::Pddl { domain_text, tasks } => {
            let (_, text, task) = single_task(tasks)?;
            let h = pddl_heuristic(spec, &task, &domain_text, &text, None).map_err(|e| usage(e.message))?;
            go(property, &task, &*h, cap)?
        }
    };
    match verdict {
        OracleVerdict::Pass => {
            println!("Pass");
            Ok(0)
        }
        OracleVerdict::Fail(v) => {
            println!("Fail: {v:?}");
            Ok(1)
        }
    }
}
