//! Checks whether a heuristic is direct on a task: a DFS over strictly
//! improving transitions that stops at the first violation, plus exact
//! brute-force oracles for the direct and DDA properties.

mod oracle;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use oracle::{oracle_dda, oracle_direct, OracleError, OracleReport, OracleVerdict, Violation};

use crate::heuristics::{EvalError, Heuristic, HeuristicValue};
use crate::state_space::TransitionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CounterexampleKind {
    Plateau,
    DeadEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessorValue {
    pub action: String,
    pub h: HeuristicValue,
}

/// A witness that a heuristic is not direct on a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub state: Vec<String>,
    pub h_state: HeuristicValue,
    /// Every successor with its value, in successor order. Empty for dead ends.
    pub successors: Vec<SuccessorValue>,
    /// Value of the state the dead end was reached from. `None` only when the
    /// initial state itself has no successors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_h: Option<HeuristicValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
    pub task_id: String,
    pub path_from_initial: Vec<String>,
}

impl Counterexample {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counterexample serializes")
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            CounterexampleKind::Plateau => "plateau",
            CounterexampleKind::DeadEnd => "dead end",
        };
        write!(f, "{kind} on task {} at depth {} with h = {}", self.task_id, self.path_from_initial.len(), self.h_state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The improving subgraph was exhausted without a violation.
    Pass { states_checked: u64 },
    /// The time limit fired before the DFS finished.
    PresumedPass { states_checked: u64 },
    Fail(Counterexample),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Fail(cx) => Some(cx),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationStats {
    pub wall_time: Duration,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationOutcome {
    pub verdict: Verdict,
    pub stats: ValidationStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("heuristic failed on task {task_id}: {error}")]
    HeuristicEvaluationFailure { task_id: String, state: Vec<String>, error: EvalError },
    #[error("heuristic could not be set up for task {task_id}: {error}")]
    HeuristicUnavailable { task_id: String, error: EvalError },
    #[error("time limit must be positive")]
    InvalidTimeLimit,
    #[error("empty task list")]
    EmptySuite,
}

struct Entry<S> {
    state: S,
    h: HeuristicValue,
    parent: Option<usize>,
    label: String,
}

/// Depth-first search from the initial state over strictly improving
/// transitions. Improving successors are visited in successor order; each
/// state is expanded at most once.
pub fn check_direct<T, H>(
    ts: &T,
    h: &H,
    time_limit: Duration,
    task_id: &str,
) -> Result<ValidationOutcome, ValidationError>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    if time_limit.is_zero() {
        return Err(ValidationError::InvalidTimeLimit);
    }
    let start = Instant::now();
    let mut cache: HashMap<T::State, HeuristicValue> = HashMap::new();
    let mut evaluations = 0u64;
    let fail = |state: &T::State, error: EvalError| ValidationError::HeuristicEvaluationFailure {
        task_id: task_id.to_string(),
        state: ts.describe(state),
        error,
    };

    let s0 = ts.initial();
    let h0 = h.evaluate(&s0).map_err(|e| fail(&s0, e))?;
    evaluations += 1;
    cache.insert(s0.clone(), h0);
    let finish = |verdict, evaluations| ValidationOutcome {
        verdict,
        stats: ValidationStats { wall_time: start.elapsed(), evaluations },
    };
    if ts.is_goal(&s0) {
        return Ok(finish(Verdict::Pass { states_checked: 0 }, evaluations));
    }

    let mut arena = vec![Entry { state: s0, h: h0, parent: None, label: String::new() }];
    let mut stack = vec![0usize];
    let mut expanded: HashSet<T::State> = HashSet::new();
    let mut states_checked = 0u64;
    while let Some(id) = stack.pop() {
        if expanded.contains(&arena[id].state) {
            continue;
        }
        if start.elapsed() >= time_limit {
            return Ok(finish(Verdict::PresumedPass { states_checked }, evaluations));
        }
        expanded.insert(arena[id].state.clone());
        states_checked += 1;
        let state = arena[id].state.clone();
        let h_state = arena[id].h;

        let successors = ts.successors(&state);
        if successors.is_empty() {
            let parent_h = arena[id].parent.map(|p| arena[p].h);
            let suggestion = Some(match parent_h {
                Some(ph) => format!(
                    "this state has no successors; assign it a value h >= {ph}, the value of the state it was reached from, so it is not an improving successor"
                ),
                None => "the initial state has no successors; no heuristic makes this task solvable".to_string(),
            });
            let cx = Counterexample {
                kind: CounterexampleKind::DeadEnd,
                state: ts.describe(&state),
                h_state,
                successors: Vec::new(),
                parent_h,
                suggestion,
                task_id: task_id.to_string(),
                path_from_initial: path(&arena, id),
            };
            return Ok(finish(Verdict::Fail(cx), evaluations));
        }

        let missing: Vec<T::State> = {
            let mut seen = HashSet::new();
            successors
                .iter()
                .filter(|(_, s)| !cache.contains_key(s) && seen.insert(s.clone()))
                .map(|(_, s)| s.clone())
                .collect()
        };
        if !missing.is_empty() {
            let values = h.evaluate_batch(&missing).map_err(|e| fail(&state, e))?;
            evaluations += values.len() as u64;
            cache.extend(missing.into_iter().zip(values));
        }
        let values: Vec<HeuristicValue> = successors.iter().map(|(_, s)| cache[s]).collect();

        if values.iter().all(|v| *v >= h_state) {
            let cx = Counterexample {
                kind: CounterexampleKind::Plateau,
                state: ts.describe(&state),
                h_state,
                successors: successors
                    .iter()
                    .zip(&values)
                    .map(|((l, _), v)| SuccessorValue { action: l.to_string(), h: *v })
                    .collect(),
                parent_h: None,
                suggestion: None,
                task_id: task_id.to_string(),
                path_from_initial: path(&arena, id),
            };
            return Ok(finish(Verdict::Fail(cx), evaluations));
        }

        for ((label, succ), v) in successors.into_iter().zip(values).rev() {
            if v < h_state && !ts.is_goal(&succ) && !expanded.contains(&succ) {
                arena.push(Entry { state: succ, h: v, parent: Some(id), label: label.to_string() });
                stack.push(arena.len() - 1);
            }
        }
    }
    Ok(finish(Verdict::Pass { states_checked }, evaluations))
}

fn path<S>(arena: &[Entry<S>], mut id: usize) -> Vec<String> {
    let mut labels = Vec::new();
    while let Some(parent) = arena[id].parent {
        labels.push(arena[id].label.clone());
        id = parent;
    }
    labels.reverse();
    labels
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskStatus {
    Pass { states_checked: u64 },
    PresumedPass { states_checked: u64 },
    Fail(Counterexample),
    /// Skipped because an earlier task failed.
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteEntry {
    pub task_id: String,
    pub status: TaskStatus,
    pub evaluations: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    /// One entry per task, in the given order.
    pub entries: Vec<SuiteEntry>,
}

impl SuiteOutcome {
    pub fn failure(&self) -> Option<&Counterexample> {
        self.entries.iter().find_map(|e| match &e.status {
            TaskStatus::Fail(cx) => Some(cx),
            _ => None,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.status, TaskStatus::Pass { .. } | TaskStatus::PresumedPass { .. }))
    }
}

/// Runs `check_direct` task by task and stops at the first failure. `bind`
/// produces the heuristic for a task; it is not called for tasks after the
/// failing one.
pub fn check_direct_suite<'a, T, H, B>(
    tasks: &'a [(String, T)],
    mut bind: B,
    per_task_limit: Duration,
) -> Result<SuiteOutcome, ValidationError>
where
    T: TransitionSystem,
    H: Heuristic<T::State>,
    B: FnMut(&'a str, &'a T) -> Result<H, EvalError>,
{
    if tasks.is_empty() {
        return Err(ValidationError::EmptySuite);
    }
    let mut entries: Vec<SuiteEntry> = Vec::with_capacity(tasks.len());
    let mut failed = false;
    for (id, ts) in tasks {
        if failed {
            entries.push(SuiteEntry {
                task_id: id.clone(),
                status: TaskStatus::NotRun,
                evaluations: 0,
                wall_time: Duration::ZERO,
            });
            continue;
        }
        let h = bind(id, ts)
            .map_err(|error| ValidationError::HeuristicUnavailable { task_id: id.clone(), error })?;
        let outcome = check_direct(ts, &h, per_task_limit, id)?;
        let status = match outcome.verdict {
            Verdict::Pass { states_checked } => TaskStatus::Pass { states_checked },
            Verdict::PresumedPass { states_checked } => TaskStatus::PresumedPass { states_checked },
            Verdict::Fail(cx) => {
                failed = true;
                TaskStatus::Fail(cx)
            }
        };
        log::debug!("task {id}: {:?} after {} evaluations", status_label(&status), outcome.stats.evaluations);
        entries.push(SuiteEntry {
            task_id: id.clone(),
            status,
            evaluations: outcome.stats.evaluations,
            wall_time: outcome.stats.wall_time,
        });
    }
    Ok(SuiteOutcome { entries })
}

fn status_label(s: &TaskStatus) -> &'static str {
    match s {
        TaskStatus::Pass { .. } => "pass",
        TaskStatus::PresumedPass { .. } => "presumed pass",
        TaskStatus::Fail(_) => "fail",
        TaskStatus::NotRun => "not run",
    }
}

/// Checks a counterexample against the task: the path replays with strictly
/// decreasing values and ends at the reported state, and the kind-specific
/// conditions hold.
pub fn verify_counterexample<T, H>(ts: &T, h: &H, cx: &Counterexample) -> Result<(), String>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let eval = |s: &T::State| h.evaluate(s).map_err(|e| e.to_string());
    let mut current = ts.initial();
    let mut value = eval(&current)?;
    for label in &cx.path_from_initial {
        let (_, next) = ts
            .successors(&current)
            .into_iter()
            .find(|(l, _)| l == label)
            .ok_or_else(|| format!("action {label} is not applicable on the path"))?;
        let v = eval(&next)?;
        if v >= value {
            return Err(format!("path step {label} does not improve: {v} >= {value}"));
        }
        current = next;
        value = v;
    }
    if ts.describe(&current) != cx.state {
        return Err("path does not end at the reported state".into());
    }
    if value != cx.h_state {
        return Err(format!("reported h {} differs from evaluated {value}", cx.h_state));
    }
    if ts.is_goal(&current) {
        return Err("counterexample state is a goal".into());
    }
    let successors = ts.successors(&current);
    match cx.kind {
        CounterexampleKind::Plateau => {
            if successors.len() != cx.successors.len() {
                return Err("successor list is incomplete".into());
            }
            for ((label, s), reported) in successors.iter().zip(&cx.successors) {
                if *label != reported.action || eval(s)? != reported.h {
                    return Err(format!("successor {label} misreported"));
                }
                if reported.h < cx.h_state {
                    return Err(format!("successor {label} is improving"));
                }
            }
        }
        CounterexampleKind::DeadEnd => {
            if !successors.is_empty() || !cx.successors.is_empty() {
                return Err("dead end has successors".into());
            }
            match cx.parent_h {
                Some(ph) if cx.h_state < ph => {}
                Some(_) => return Err("dead end does not improve on its parent".into()),
                None if cx.path_from_initial.is_empty() => {}
                None => return Err("dead end is missing parent_h".into()),
            }
            if cx.suggestion.is_none() {
                return Err("dead end is missing the suggestion".into());
            }
        }
    }
    Ok(())
}
