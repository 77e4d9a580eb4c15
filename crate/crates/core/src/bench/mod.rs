//! Batch evaluation over task × heuristic × algorithm grids.

mod report;
mod worker;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{
    aggregate_repetitions, pairwise_expansions, summarize, write_report, AggregatedRecord, ConfigKey, ConfigSummary,
    DomainCoverage, MeanSd, PairRow, Quantiles, ReportFiles, Summary,
};
pub use worker::worker_main;

use crate::candidate_runtime::builtin::builtin_heuristic;
use crate::candidate_runtime::{CandidateSource, Origin, RuntimeLimits};
use crate::heuristics::{blind, table_heuristic, Heuristic};
use crate::pddl::{self, GroundTask};
use crate::repair::{BuiltinRunner, CandidateRunner, ProcessRunner};
use crate::search::{gbfs, hill_climb, Limits, Outcome};
use crate::state_space::{replay, ExplicitGraph, NodeId, State, TransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hc,
    Gbfs,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Hc => "hc",
            Algorithm::Gbfs => "gbfs",
        })
    }
}

/// Task entries of a suite file. Paths are relative to the suite file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskRef {
    Graph { graph: PathBuf, id: Option<String> },
    Group { domain: PathBuf, tasks: Vec<PathBuf> },
    Pddl { domain: PathBuf, task: PathBuf, id: Option<String> },
}

/// A builtin name (`ff`, `goal-count`, `blind`, `table`, ...) or a candidate
/// file. Candidates without a runner go through their builtin directive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HeuristicSpec {
    Builtin(String),
    Candidate { candidate: PathBuf, runner: Option<Vec<String>>, name: Option<String> },
}

impl HeuristicSpec {
    pub fn name(&self) -> String {
        match self {
            HeuristicSpec::Builtin(n) => n.clone(),
            HeuristicSpec::Candidate { name: Some(n), .. } => n.clone(),
            HeuristicSpec::Candidate { candidate, .. } => {
                format!("candidate:{}", candidate.file_stem().unwrap_or_default().to_string_lossy())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchLimits {
    #[serde(default = "default_wall")]
    pub wall_time_secs: f64,
    #[serde(default = "default_memory")]
    pub memory_mb: Option<u64>,
    #[serde(default)]
    pub max_expansions: Option<u64>,
}

fn default_wall() -> f64 {
    300.0
}

fn default_memory() -> Option<u64> {
    Some(8192)
}

impl Default for BenchLimits {
    fn default() -> Self {
        BenchLimits { wall_time_secs: default_wall(), memory_mb: default_memory(), max_expansions: None }
    }
}

impl BenchLimits {
    pub fn wall_time(&self) -> Duration {
        Duration::from_secs_f64(self.wall_time_secs.max(0.0))
    }

    fn search(&self) -> Limits {
        Limits { wall_time: self.wall_time(), max_expansions: self.max_expansions, max_generated: None }
    }
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub suite: String,
    pub tasks: Vec<TaskRef>,
    pub heuristics: Vec<HeuristicSpec>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub limits: BenchLimits,
    #[serde(default = "one")]
    pub repetitions: u32,
    /// Parallel workers; defaults to the number of CPUs.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunSpec {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        let mut spec: RunSpec =
            serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        spec.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(spec)
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.tasks.is_empty() {
            return Err(BenchError::Config("no tasks".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms".into()));
        }
        if self.heuristics.is_empty() {
            return Err(BenchError::Config("no heuristics".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if !self.limits.wall_time_secs.is_finite() || self.limits.wall_time_secs < 0.0 {
            return Err(BenchError::Config("wall_time_secs must be a non-negative number".into()));
        }
        Ok(())
    }

    /// Tasks with resolved paths, in file order.
    pub fn resolve_tasks(&self) -> Vec<TaskEntry> {
        let abs = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) };
        let mut out = Vec::new();
        for t in &self.tasks {
            match t {
                TaskRef::Graph { graph, id } => {
                    let path = abs(graph);
                    out.push(TaskEntry {
                        id: id.clone().unwrap_or_else(|| default_id(&path)),
                        domain: parent_name(&path),
                        source: TaskSource::Graph { graph: path },
                    });
                }
                TaskRef::Pddl { domain, task, id } => {
                    let (domain, task) = (abs(domain), abs(task));
                    out.push(TaskEntry {
                        id: id.clone().unwrap_or_else(|| default_id(&task)),
                        domain: parent_name(&domain),
                        source: TaskSource::Pddl { domain, task },
                    });
                }
                TaskRef::Group { domain, tasks } => {
                    let domain = abs(domain);
                    for task in tasks {
                        let task = abs(task);
                        out.push(TaskEntry {
                            id: default_id(&task),
                            domain: parent_name(&domain),
                            source: TaskSource::Pddl { domain: domain.clone(), task },
                        });
                    }
                }
            }
        }
        out
    }

    fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for task in self.resolve_tasks() {
            for heuristic in &self.heuristics {
                let heuristic = match heuristic {
                    HeuristicSpec::Candidate { candidate, runner, name } if candidate.is_relative() => {
                        HeuristicSpec::Candidate {
                            candidate: self.base_dir.join(candidate),
                            runner: runner.clone(),
                            name: name.clone(),
                        }
                    }
                    h => h.clone(),
                };
                for &algorithm in &self.algorithms {
                    for repetition in 0..self.repetitions {
                        jobs.push(Job {
                            suite: self.suite.clone(),
                            task: task.clone(),
                            heuristic: heuristic.clone(),
                            algorithm,
                            limits: self.limits,
                            repetition,
                        });
                    }
                }
            }
        }
        jobs
    }
}

fn parent_name(p: &Path) -> String {
    p.parent().and_then(Path::file_name).map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn default_id(p: &Path) -> String {
    let stem = p.file_stem().unwrap_or_default().to_string_lossy();
    match parent_name(p) {
        d if d.is_empty() => stem.into_owned(),
        d => format!("{d}/{stem}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub id: String,
    /// Grouping key for per-domain coverage: the directory holding the
    /// domain (or graph) file.
    pub domain: String,
    pub source: TaskSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskSource {
    Pddl { domain: PathBuf, task: PathBuf },
    Graph { graph: PathBuf },
}

/// One cell of the grid, as sent to a worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub suite: String,
    pub task: TaskEntry,
    pub heuristic: HeuristicSpec,
    pub algorithm: Algorithm,
    pub limits: BenchLimits,
    pub repetition: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Solved,
    Stuck,
    Exhausted,
    Timeout,
    /// `memory`, `heuristic`, `load`, `parse`, `invalid-plan`, `crash`.
    Error(String),
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Solved => f.write_str("solved"),
            RunOutcome::Stuck => f.write_str("stuck"),
            RunOutcome::Exhausted => f.write_str("exhausted"),
            RunOutcome::Timeout => f.write_str("timeout"),
            RunOutcome::Error(kind) => write!(f, "error({kind})"),
        }
    }
}

impl std::str::FromStr for RunOutcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "solved" => RunOutcome::Solved,
            "stuck" => RunOutcome::Stuck,
            "exhausted" => RunOutcome::Exhausted,
            "timeout" => RunOutcome::Timeout,
            _ => match s.strip_prefix("error(").and_then(|r| r.strip_suffix(')')) {
                Some(kind) => RunOutcome::Error(kind.to_string()),
                None => return Err(format!("unknown outcome `{s}`")),
            },
        })
    }
}

impl Serialize for RunOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RunOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub suite: String,
    pub domain: String,
    pub task: String,
    pub algorithm: Algorithm,
    pub heuristic: String,
    pub repetition: u32,
    pub outcome: RunOutcome,
    /// Present exactly when solved; the plan was checked by replay.
    pub plan_length: Option<usize>,
    pub expansions: u64,
    pub evaluations: u64,
    pub wall_ms: u64,
}

impl RunRecord {
    fn new(job: &Job, outcome: RunOutcome) -> Self {
        RunRecord {
            suite: job.suite.clone(),
            domain: job.task.domain.clone(),
            task: job.task.id.clone(),
            algorithm: job.algorithm,
            heuristic: job.heuristic.name(),
            repetition: job.repetition,
            outcome,
            plan_length: None,
            expansions: 0,
            evaluations: 0,
            wall_ms: 0,
        }
    }

    pub fn solved(&self) -> bool {
        self.outcome == RunOutcome::Solved
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid suite: {0}")]
    Config(String),
    #[error("task {task}: {message}")]
    Parse { task: String, message: String },
}

/// How records are executed.
#[derive(Debug, Clone, Default)]
pub enum Executor {
    /// Threads in this process; memory limits are not enforced.
    #[default]
    InProcess,
    /// One supervised child per record: `command` followed by no arguments
    /// reads a [`Job`] on stdin and writes a [`RunRecord`] on stdout.
    Workers { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

pub(crate) enum Loaded {
    Pddl { task: GroundTask, domain_text: String, task_text: String },
    Graph(ExplicitGraph),
}

pub(crate) fn load_task(entry: &TaskEntry) -> Result<Loaded, String> {
    match &entry.source {
        TaskSource::Pddl { domain, task } => {
            let domain_text = fs::read_to_string(domain).map_err(|e| format!("{}: {e}", domain.display()))?;
            let task_text = fs::read_to_string(task).map_err(|e| format!("{}: {e}", task.display()))?;
            let ground = pddl::load(&domain_text, &task_text).map_err(|e| e.to_string())?;
            Ok(Loaded::Pddl { task: ground, domain_text, task_text })
        }
        TaskSource::Graph { graph } => ExplicitGraph::load(graph).map(Loaded::Graph).map_err(|e| e.to_string()),
    }
}

/// Runs the grid. Records come back in grid order (task, heuristic,
/// algorithm, repetition) whatever the completion order.
pub fn run_suite(spec: &RunSpec, executor: &Executor) -> Result<SuiteReport, BenchError> {
    spec.validate()?;
    let entries = spec.resolve_tasks();
    let mut cache = Vec::with_capacity(entries.len());
    for e in &entries {
        let loaded = load_task(e).map_err(|message| BenchError::Parse { task: e.id.clone(), message })?;
        cache.push((e.id.clone(), loaded));
    }
    let jobs = spec.jobs();
    let workers = spec
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let record = match executor {
                    Executor::InProcess => {
                        let loaded = &cache.iter().find(|(id, _)| *id == job.task.id).expect("task cached").1;
                        run_loaded(job, loaded)
                    }
                    Executor::Workers { command } => worker::supervise(command, job),
                };
                log::info!("{} {} {}: {}", record.task, record.algorithm, record.heuristic, record.outcome);
                results.lock().expect("results poisoned")[i] = Some(record);
            });
        }
    });
    let records: Vec<RunRecord> =
        results.into_inner().expect("results poisoned").into_iter().map(|r| r.expect("every job ran")).collect();
    let summary = summarize(&spec.suite, &records);
    Ok(SuiteReport { records, summary })
}

/// Loads the task and runs one record. Used by workers.
pub fn run_job(job: &Job) -> RunRecord {
    match load_task(&job.task) {
        Ok(loaded) => run_loaded(job, &loaded),
        Err(message) => {
            log::warn!("{}: {message}", job.task.id);
            RunRecord::new(job, RunOutcome::Error("parse".into()))
        }
    }
}

/// Why a heuristic could not be built; `kind` is the record error tag.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct BindError {
    pub kind: &'static str,
    pub message: String,
}

impl BindError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        BindError { kind, message: message.into() }
    }
}

/// `table` or `blind` on an explicit graph.
pub fn graph_heuristic<'g>(spec: &HeuristicSpec, graph: &'g ExplicitGraph) -> Result<Box<dyn Heuristic<NodeId> + 'g>, BindError> {
    match spec {
        HeuristicSpec::Builtin(n) if n == "table" => {
            table_heuristic(graph).map(|t| Box::new(t) as Box<dyn Heuristic<NodeId>>).map_err(|e| BindError::new("heuristic", e.to_string()))
        }
        HeuristicSpec::Builtin(n) if n == "blind" => Ok(Box::new(blind(graph))),
        h => Err(BindError::new("heuristic", format!("{} is not available on explicit graphs", h.name()))),
    }
}

/// A builtin (`table` meaning the perfect heuristic) or a candidate bound
/// to `task`.
pub fn pddl_heuristic<'t>(
    spec: &HeuristicSpec,
    task: &'t GroundTask,
    domain_text: &str,
    task_text: &str,
    memory_mb: Option<u64>,
) -> Result<Box<dyn Heuristic<State> + 't>, BindError> {
    match spec {
        HeuristicSpec::Builtin(n) => {
            let name = if n == "table" { "perfect" } else { n.as_str() };
            builtin_heuristic(name, task).ok_or_else(|| BindError::new("heuristic", format!("unknown heuristic `{n}`")))
        }
        HeuristicSpec::Candidate { candidate, runner, .. } => {
            let code = fs::read_to_string(candidate).map_err(|e| BindError::new("load", format!("{}: {e}", candidate.display())))?;
            let source = CandidateSource::new("python", code, Origin::Initial).map_err(|e| BindError::new("load", e.to_string()))?;
            let bound = match runner {
                None => BuiltinRunner.bind(&source, task, domain_text, task_text),
                Some(command) => {
                    let limits = RuntimeLimits { memory_bytes: memory_mb.map(|m| m * 1024 * 1024), ..RuntimeLimits::default() };
                    ProcessRunner { command: command.clone(), limits }.bind(&source, task, domain_text, task_text)
                }
            };
            bound.map_err(|e| BindError::new("load", e.to_string()))
        }
    }
}

fn run_loaded(job: &Job, loaded: &Loaded) -> RunRecord {
    let limits = job.limits.search();
    match loaded {
        Loaded::Graph(graph) => match graph_heuristic(&job.heuristic, graph) {
            Ok(h) => search_record(job, graph, &h, limits),
            Err(e) => error_record(job, e),
        },
        Loaded::Pddl { task, domain_text, task_text } => {
            match pddl_heuristic(&job.heuristic, task, domain_text, task_text, job.limits.memory_mb) {
                Ok(h) => search_record(job, task, &h, limits),
                Err(e) => error_record(job, e),
            }
        }
    }
}

fn error_record(job: &Job, e: BindError) -> RunRecord {
    log::warn!("{} {}: {}", job.task.id, job.heuristic.name(), e.message);
    RunRecord::new(job, RunOutcome::Error(e.kind.into()))
}

fn search_record<T, H>(job: &Job, ts: &T, h: &H, limits: Limits) -> RunRecord
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let result = match job.algorithm {
        Algorithm::Hc => hill_climb(ts, h, limits),
        Algorithm::Gbfs => gbfs(ts, h, limits),
    };
    let (outcome, plan_length) = match &result.outcome {
        Outcome::Plan(plan) => match replay(ts, plan) {
            Some(trace) if trace.last().is_some_and(|s| ts.is_goal(s)) => (RunOutcome::Solved, Some(plan.len())),
            _ => (RunOutcome::Error("invalid-plan".into()), None),
        },
        Outcome::Stuck { .. } => (RunOutcome::Stuck, None),
        Outcome::Exhausted => (RunOutcome::Exhausted, None),
        Outcome::Timeout => (RunOutcome::Timeout, None),
        Outcome::HeuristicFailure(e) => {
            log::warn!("{} {}: {}", job.task.id, job.heuristic.name(), e.message);
            (RunOutcome::Error("heuristic".into()), None)
        }
    };
    RunRecord {
        plan_length,
        expansions: result.stats.expansions,
        evaluations: result.stats.evaluations,
        wall_ms: result.stats.wall_time.as_millis() as u64,
        ..RunRecord::new(job, outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixtures() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
    }

    fn spec(tasks: Vec<TaskRef>, heuristics: &[&str], algorithms: Vec<Algorithm>) -> RunSpec {
        RunSpec {
            suite: "test".into(),
            tasks,
            heuristics: heuristics.iter().map(|h| HeuristicSpec::Builtin(h.to_string())).collect(),
            algorithms,
            limits: BenchLimits { wall_time_secs: 30.0, ..Default::default() },
            repetitions: 1,
            workers: Some(2),
            base_dir: fixtures(),
        }
    }

    #[test]
    fn hc_with_table_on_fig2b_takes_three_expansions() {
        let s = spec(vec![TaskRef::Graph { graph: "graphs/fig2b.json".into(), id: None }], &["table"], vec![Algorithm::Hc]);
        let report = run_suite(&s, &Executor::InProcess).unwrap();
        let r = &report.records[0];
        assert_eq!(r.outcome, RunOutcome::Solved);
        assert_eq!(r.expansions, 3);
        assert_eq!(r.plan_length, Some(3));
        assert_eq!(r.task, "graphs/fig2b");
    }

    #[test]
    fn zero_limit_times_out_everything() {
        let mut s = spec(
            vec![TaskRef::Group { domain: "ferry/domain.pddl".into(), tasks: vec!["ferry/p00.pddl".into(), "ferry/p01.pddl".into()] }],
            &["ff", "blind"],
            vec![Algorithm::Hc, Algorithm::Gbfs],
        );
        s.limits.wall_time_secs = 0.0;
        let report = run_suite(&s, &Executor::InProcess).unwrap();
        assert_eq!(report.records.len(), 8);
        assert!(report.records.iter().all(|r| r.outcome == RunOutcome::Timeout));
    }

    #[test]
    fn records_keep_grid_order_with_repetitions() {
        let mut s = spec(
            vec![TaskRef::Pddl { domain: "gripper/domain.pddl".into(), task: "gripper/p01.pddl".into(), id: Some("g".into()) }],
            &["ff", "goal-count"],
            vec![Algorithm::Gbfs],
        );
        s.repetitions = 2;
        let report = run_suite(&s, &Executor::InProcess).unwrap();
        let keys: Vec<_> = report.records.iter().map(|r| (r.heuristic.as_str(), r.repetition)).collect();
        assert_eq!(keys, [("ff", 0), ("ff", 1), ("goal-count", 0), ("goal-count", 1)]);
        assert!(report.records.iter().all(|r| r.solved() && r.plan_length.is_some()));
    }

    #[test]
    fn config_errors() {
        let s = spec(vec![], &["ff"], vec![Algorithm::Hc]);
        assert!(matches!(run_suite(&s, &Executor::InProcess), Err(BenchError::Config(_))));
        let s = spec(vec![TaskRef::Graph { graph: "graphs/fig2b.json".into(), id: None }], &["ff"], vec![]);
        assert!(matches!(run_suite(&s, &Executor::InProcess), Err(BenchError::Config(_))));
        let s = spec(vec![TaskRef::Graph { graph: "graphs/missing.json".into(), id: None }], &["ff"], vec![Algorithm::Hc]);
        assert!(matches!(run_suite(&s, &Executor::InProcess), Err(BenchError::Parse { .. })));
    }

    #[test]
    fn unknown_heuristic_is_a_record_error() {
        let s = spec(vec![TaskRef::Graph { graph: "graphs/fig2b.json".into(), id: None }], &["ff"], vec![Algorithm::Hc]);
        let report = run_suite(&s, &Executor::InProcess).unwrap();
        assert_eq!(report.records[0].outcome, RunOutcome::Error("heuristic".into()));
    }

    #[test]
    fn spec_json_shapes() {
        let text = r#"{
            "suite": "s",
            "tasks": [
                {"graph": "graphs/fig2a.json"},
                {"domain": "ferry/domain.pddl", "tasks": ["ferry/p00.pddl"]},
                {"domain": "blocks/domain.pddl", "task": "blocks/p01.pddl", "id": "sussman"}
            ],
            "heuristics": ["ff", {"candidate": "c.py"}],
            "algorithms": ["hc", "gbfs"]
        }"#;
        let s: RunSpec = serde_json::from_str(text).unwrap();
        assert_eq!(s.repetitions, 1);
        assert_eq!(s.limits, BenchLimits::default());
        let ids: Vec<_> = s.resolve_tasks().into_iter().map(|t| t.id).collect();
        assert_eq!(ids, ["graphs/fig2a", "ferry/p00", "sussman"]);
        assert_eq!(s.heuristics[1].name(), "candidate:c");
    }

    #[test]
    fn outcome_strings_round_trip() {
        for o in [RunOutcome::Solved, RunOutcome::Timeout, RunOutcome::Error("memory".into())] {
            assert_eq!(o.to_string().parse::<RunOutcome>().unwrap(), o);
        }
        assert!("bogus".parse::<RunOutcome>().is_err());
    }
}
