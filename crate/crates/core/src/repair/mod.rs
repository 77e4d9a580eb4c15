//! The counterexample-driven repair loop: ask for a candidate, validate it on
//! the training tasks, feed the failure back, repeat.

mod prompt;
mod runner;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use prompt::{build_initial_prompt, build_repair_prompt, render_feedback, Templates};
pub use runner::{BuiltinRunner, CandidateRunner, ProcessRunner};

use crate::candidate_runtime::{CandidateSource, Origin};
use crate::heuristics::EvalError;
use crate::pddl::{self, GroundTask, PddlError};
use crate::search::{gbfs, Limits, Outcome};
use crate::synth::{extract_candidate, Prompt, SynthError, Synthesizer, TemplateError};
use crate::validator::{check_direct_suite, Counterexample, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    #[default]
    DirectProperty,
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorPhase {
    /// The response had no usable code block.
    Extract,
    Load,
    Eval,
}

impl ErrorPhase {
    fn describe(self) -> &'static str {
        match self {
            ErrorPhase::Extract => "extracting code from the response",
            ErrorPhase::Load => "loading",
            ErrorPhase::Eval => "evaluating states",
        }
    }
}

/// Why a candidate was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    Counterexample(Counterexample),
    Error { task_id: Option<String>, phase: ErrorPhase, message: String, stderr_tail: Option<String> },
    /// First training task GBFS failed to solve, with the expansions spent.
    Coverage { task_id: String, expansions: u64, reason: String, solved: usize, total: usize },
}

impl Feedback {
    pub fn task_id(&self) -> Option<&str> {
        match self {
            Feedback::Counterexample(cx) => Some(&cx.task_id),
            Feedback::Error { task_id, .. } => task_id.as_deref(),
            Feedback::Coverage { task_id, .. } => Some(task_id),
        }
    }
}

/// A training task as text, identified by `id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskText {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub domain_text: String,
    /// Sorted by size before use; see [`order_by_size`].
    pub training_tasks: Vec<TaskText>,
    pub max_iterations: u32,
    pub per_task_validation_limit: Duration,
    pub feedback_mode: FeedbackMode,
    /// Expansion cap for GBFS in coverage mode, on top of the time limit.
    pub coverage_max_expansions: Option<u64>,
    pub templates: Templates,
}

impl RepairConfig {
    pub fn new(domain_text: impl Into<String>, training_tasks: Vec<TaskText>) -> Self {
        RepairConfig {
            domain_text: domain_text.into(),
            training_tasks,
            max_iterations: 10,
            per_task_validation_limit: Duration::from_secs(30),
            feedback_mode: FeedbackMode::DirectProperty,
            coverage_max_expansions: None,
            templates: Templates::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("task {task}: {source}")]
    Pddl { task: String, source: PddlError },
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("writing transcript: {0}")]
    Io(#[from] std::io::Error),
}

/// One prompt/response round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    /// 1-based.
    pub index: u32,
    pub prompt: Prompt,
    pub response: String,
    pub candidate: Option<CandidateSource>,
    /// `None` when the candidate passed.
    pub feedback: Option<Feedback>,
    pub validation_ms: u64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairTranscript {
    pub iterations: Vec<Iteration>,
}

impl RepairTranscript {
    /// Number of synthesizer calls that produced a response.
    pub fn candidates_generated(&self) -> usize {
        self.iterations.len()
    }

    pub fn validation_wall_time(&self) -> Duration {
        Duration::from_millis(self.iterations.iter().map(|i| i.validation_ms).sum())
    }

    pub fn evaluations(&self) -> u64 {
        self.iterations.iter().map(|i| i.evaluations).sum()
    }

    /// One JSON document per iteration, one per line.
    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let mut f = fs::File::create(path)?;
        for it in &self.iterations {
            serde_json::to_writer(&mut f, it)?;
            f.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        let iterations = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(RepairTranscript { iterations })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepairOutcome {
    Converged(CandidateSource),
    /// The budget ran out; carries the last candidate extracted, if any.
    BudgetExhausted(Option<CandidateSource>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub outcome: RepairOutcome,
    pub transcript: RepairTranscript,
}

impl RepairResult {
    pub fn converged(&self) -> Option<&CandidateSource> {
        match &self.outcome {
            RepairOutcome::Converged(c) => Some(c),
            RepairOutcome::BudgetExhausted(_) => None,
        }
    }

    /// Writes `transcript.jsonl` and the final candidate into `dir`:
    /// `heuristic.py` on convergence, `last_candidate.py` otherwise.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, RepairError> {
        fs::create_dir_all(dir)?;
        self.transcript.write_jsonl(&dir.join("transcript.jsonl"))?;
        let (name, candidate) = match &self.outcome {
            RepairOutcome::Converged(c) => ("heuristic.py", Some(c)),
            RepairOutcome::BudgetExhausted(c) => ("last_candidate.py", c.as_ref()),
        };
        if let Some(c) = candidate {
            fs::write(dir.join(name), &c.code)?;
        }
        Ok(dir.join("transcript.jsonl"))
    }
}

/// Grounded training task.
struct Prepared {
    id: String,
    text: String,
    task: GroundTask,
}

/// Sorts tasks by object count, then text length, then id.
pub fn order_by_size(domain_text: &str, tasks: &[TaskText]) -> Result<Vec<TaskText>, RepairError> {
    let domain = pddl::parse_domain(domain_text).map_err(|source| RepairError::Pddl { task: "domain".into(), source })?;
    let mut keyed = Vec::with_capacity(tasks.len());
    for t in tasks {
        let ast = pddl::parse_task(&t.text, &domain).map_err(|source| RepairError::Pddl { task: t.id.clone(), source })?;
        keyed.push(((ast.objects.len(), t.text.len(), t.id.clone()), t.clone()));
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

struct Loop<'c, R> {
    config: &'c RepairConfig,
    runner: &'c R,
    tasks: Vec<Prepared>,
    text_by_id: HashMap<String, usize>,
}

struct Verdict {
    feedback: Option<Feedback>,
    evaluations: u64,
}

impl<'c, R: CandidateRunner> Loop<'c, R> {
    fn new(config: &'c RepairConfig, runner: &'c R) -> Result<Self, RepairError> {
        if config.max_iterations < 1 {
            return Err(RepairError::Config("max_iterations must be at least 1".into()));
        }
        if config.training_tasks.is_empty() {
            return Err(RepairError::Config("no training tasks".into()));
        }
        if config.per_task_validation_limit.is_zero() {
            return Err(RepairError::Config("per-task validation limit must be positive".into()));
        }
        let ordered = order_by_size(&config.domain_text, &config.training_tasks)?;
        let mut tasks = Vec::with_capacity(ordered.len());
        for t in ordered {
            let task = pddl::load(&config.domain_text, &t.text)
                .map_err(|source| RepairError::Pddl { task: t.id.clone(), source })?;
            tasks.push(Prepared { id: t.id, text: t.text, task });
        }
        let text_by_id = tasks.iter().enumerate().map(|(i, t)| (t.id.clone(), i)).collect();
        Ok(Loop { config, runner, tasks, text_by_id })
    }

    fn task_text(&self, id: Option<&str>) -> &str {
        let i = id.and_then(|id| self.text_by_id.get(id).copied()).unwrap_or(0);
        &self.tasks[i].text
    }

    fn validate(&self, candidate: &CandidateSource) -> Verdict {
        match self.config.feedback_mode {
            FeedbackMode::DirectProperty => self.validate_direct(candidate),
            FeedbackMode::Coverage => self.validate_coverage(candidate),
        }
    }

    fn validate_direct(&self, candidate: &CandidateSource) -> Verdict {
        let suite: Vec<(String, &GroundTask)> = self.tasks.iter().map(|t| (t.id.clone(), &t.task)).collect();
        let result = check_direct_suite(
            &suite,
            |id, task| {
                let text = self.task_text(Some(id));
                self.runner.bind(candidate, task, &self.config.domain_text, text).map_err(EvalError::from)
            },
            self.config.per_task_validation_limit,
        );
        match result {
            Ok(outcome) => Verdict {
                evaluations: outcome.entries.iter().map(|e| e.evaluations).sum(),
                feedback: outcome.failure().cloned().map(Feedback::Counterexample),
            },
            Err(ValidationError::HeuristicEvaluationFailure { task_id, state, error }) => Verdict {
                feedback: Some(Feedback::Error {
                    task_id: Some(task_id),
                    phase: ErrorPhase::Eval,
                    message: format!("{} (state: {})", error.message, state.join(" ")),
                    stderr_tail: error.stderr_tail,
                }),
                evaluations: 0,
            },
            Err(ValidationError::HeuristicUnavailable { task_id, error }) => Verdict {
                feedback: Some(Feedback::Error {
                    task_id: Some(task_id),
                    phase: ErrorPhase::Load,
                    message: error.message,
                    stderr_tail: error.stderr_tail,
                }),
                evaluations: 0,
            },
            Err(e) => Verdict {
                feedback: Some(Feedback::Error { task_id: None, phase: ErrorPhase::Eval, message: e.to_string(), stderr_tail: None }),
                evaluations: 0,
            },
        }
    }

    fn validate_coverage(&self, candidate: &CandidateSource) -> Verdict {
        let mut limits = Limits::time(self.config.per_task_validation_limit);
        limits.max_expansions = self.config.coverage_max_expansions;
        let mut evaluations = 0;
        let mut solved = 0;
        let mut first_unsolved = None;
        for t in &self.tasks {
            let h = match self.runner.bind(candidate, &t.task, &self.config.domain_text, &t.text) {
                Ok(h) => h,
                Err(e) => {
                    let e = EvalError::from(e);
                    return Verdict {
                        feedback: Some(Feedback::Error {
                            task_id: Some(t.id.clone()),
                            phase: ErrorPhase::Load,
                            message: e.message,
                            stderr_tail: e.stderr_tail,
                        }),
                        evaluations,
                    };
                }
            };
            let r = gbfs(&t.task, &h, limits);
            evaluations += r.stats.evaluations;
            match r.outcome {
                Outcome::Plan(_) => solved += 1,
                Outcome::HeuristicFailure(e) => {
                    return Verdict {
                        feedback: Some(Feedback::Error {
                            task_id: Some(t.id.clone()),
                            phase: ErrorPhase::Eval,
                            message: e.message,
                            stderr_tail: e.stderr_tail,
                        }),
                        evaluations,
                    };
                }
                other => {
                    if first_unsolved.is_none() {
                        first_unsolved = Some((t.id.clone(), r.stats.expansions, other.label().to_string()));
                    }
                }
            }
        }
        let total = self.tasks.len();
        Verdict {
            feedback: first_unsolved
                .map(|(task_id, expansions, reason)| Feedback::Coverage { task_id, expansions, reason, solved, total }),
            evaluations,
        }
    }

    fn initial_prompt(&self) -> Result<Prompt, TemplateError> {
        let t = &self.config.templates;
        build_initial_prompt(
            t,
            &self.config.domain_text,
            &self.tasks[0].text,
            &self.tasks[self.tasks.len() - 1].text,
            &t.examples,
            &t.planner_excerpt,
            &t.checklist,
        )
    }

    fn run<S: Synthesizer + ?Sized>(&self, synth: &mut S) -> Result<RepairResult, RepairError> {
        let mut transcript = RepairTranscript::default();
        let mut last_candidate = None;
        for index in 1..=self.config.max_iterations {
            let prompt = match transcript.iterations.last() {
                None => self.initial_prompt()?,
                Some(prev) => {
                    let feedback = prev.feedback.as_ref().expect("only failed iterations continue the loop");
                    build_repair_prompt(
                        &self.config.templates,
                        &self.config.domain_text,
                        self.task_text(feedback.task_id()),
                        feedback,
                        &transcript,
                        &self.config.templates.checklist,
                    )?
                }
            };
            let response = synth.complete(&prompt)?;
            let origin = if index == 1 { Origin::Initial } else { Origin::Repair(index - 1) };
            let start = Instant::now();
            let (candidate, verdict) = match extract_candidate(&response, origin) {
                Ok(c) => {
                    let v = self.validate(&c);
                    (Some(c), v)
                }
                Err(e) => (
                    None,
                    Verdict {
                        feedback: Some(Feedback::Error {
                            task_id: None,
                            phase: ErrorPhase::Extract,
                            message: e.to_string(),
                            stderr_tail: None,
                        }),
                        evaluations: 0,
                    },
                ),
            };
            log::info!(
                "iteration {index}: {}",
                verdict.feedback.as_ref().map_or("passed".to_string(), |f| format!("rejected on {:?}", f.task_id()))
            );
            if candidate.is_some() {
                last_candidate = candidate.clone();
            }
            let passed = verdict.feedback.is_none();
            transcript.iterations.push(Iteration {
                index,
                prompt,
                response,
                candidate,
                feedback: verdict.feedback,
                validation_ms: start.elapsed().as_millis() as u64,
                evaluations: verdict.evaluations,
            });
            if passed {
                let c = last_candidate.expect("a passing iteration has a candidate");
                return Ok(RepairResult { outcome: RepairOutcome::Converged(c), transcript });
            }
        }
        Ok(RepairResult { outcome: RepairOutcome::BudgetExhausted(last_candidate), transcript })
    }
}

/// Runs the loop in the configured feedback mode.
pub fn run_repair<S, R>(config: &RepairConfig, synth: &mut S, runner: &R) -> Result<RepairResult, RepairError>
where
    S: Synthesizer + ?Sized,
    R: CandidateRunner,
{
    Loop::new(config, runner)?.run(synth)
}

/// The ablation that replaces the property check with GBFS coverage.
pub fn run_coverage_feedback<S, R>(config: &RepairConfig, synth: &mut S, runner: &R) -> Result<RepairResult, RepairError>
where
    S: Synthesizer + ?Sized,
    R: CandidateRunner,
{
    if config.feedback_mode != FeedbackMode::Coverage {
        return Err(RepairError::Config("coverage feedback requires feedback_mode = coverage".into()));
    }
    run_repair(config, synth, runner)
}

/// Min, mean with sample standard deviation, and max of per-run candidate
/// counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateStats {
    pub runs: usize,
    pub min: usize,
    pub mean: f64,
    pub sd: f64,
    pub max: usize,
    pub total: usize,
}

impl CandidateStats {
    pub fn from_counts(counts: &[usize]) -> Option<Self> {
        let n = counts.len();
        let (&min, &max) = (counts.iter().min()?, counts.iter().max()?);
        let total: usize = counts.iter().sum();
        let mean = total as f64 / n as f64;
        let sd = if n > 1 {
            (counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(CandidateStats { runs: n, min, mean, sd, max, total })
    }

    pub fn from_transcripts(transcripts: &[RepairTranscript]) -> Option<Self> {
        Self::from_counts(&transcripts.iter().map(RepairTranscript::candidates_generated).collect::<Vec<_>>())
    }
}
