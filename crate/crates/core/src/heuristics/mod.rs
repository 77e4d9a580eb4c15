//! Heuristic interface and the built-in baselines.

mod ff;
mod value;

use std::collections::HashMap;
use std::hash::Hash;

use thiserror::Error;

pub use ff::{best_supporter_trace, ff, FfHeuristic};
pub use value::{HeuristicValue, InvalidValue};

use crate::pddl::{FactId, GroundTask};
use crate::state_space::{enumerate_reachable, ExplicitGraph, NodeId, State, StateSpaceError, TransitionSystem};

/// A heuristic could not produce a value for a state.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct EvalError {
    pub message: String,
    /// Tail of the evaluating process's standard error, when there is one.
    pub stderr_tail: Option<String>,
}

impl EvalError {
    pub fn new(message: impl Into<String>) -> Self {
        EvalError { message: message.into(), stderr_tail: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeuristicError {
    #[error("no heuristic value for node `{0}`")]
    MissingEntry(String),
    #[error("goal is unreachable in the delete relaxation")]
    Unreachable,
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
}

/// Maps states to estimates. Implementations are pure: the same state always
/// gets the same value.
pub trait Heuristic<S> {
    fn name(&self) -> &str;

    fn evaluate(&self, s: &S) -> Result<HeuristicValue, EvalError>;

    /// Evaluates several states; out-of-process heuristics override this to
    /// use a single round trip.
    fn evaluate_batch(&self, states: &[S]) -> Result<Vec<HeuristicValue>, EvalError> {
        states.iter().map(|s| self.evaluate(s)).collect()
    }
}

impl<S, H: Heuristic<S> + ?Sized> Heuristic<S> for &H {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn evaluate(&self, s: &S) -> Result<HeuristicValue, EvalError> {
        (**self).evaluate(s)
    }
    fn evaluate_batch(&self, states: &[S]) -> Result<Vec<HeuristicValue>, EvalError> {
        (**self).evaluate_batch(states)
    }
}

impl<S, H: Heuristic<S> + ?Sized> Heuristic<S> for Box<H> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn evaluate(&self, s: &S) -> Result<HeuristicValue, EvalError> {
        (**self).evaluate(s)
    }
    fn evaluate_batch(&self, states: &[S]) -> Result<Vec<HeuristicValue>, EvalError> {
        (**self).evaluate_batch(states)
    }
}

/// 0 on goal states, 1 elsewhere.
pub struct Blind<'t, T> {
    ts: &'t T,
}

pub fn blind<T: TransitionSystem>(ts: &T) -> Blind<'_, T> {
    Blind { ts }
}

impl<T: TransitionSystem> Heuristic<T::State> for Blind<'_, T> {
    fn name(&self) -> &str {
        "blind"
    }

    fn evaluate(&self, s: &T::State) -> Result<HeuristicValue, EvalError> {
        Ok(if self.ts.is_goal(s) { HeuristicValue::ZERO } else { HeuristicValue::finite(1) })
    }
}

/// Number of unsatisfied goal facts.
#[derive(Debug, Clone)]
pub struct GoalCount {
    goal: Vec<FactId>,
}

pub fn goal_count(task: &GroundTask) -> GoalCount {
    GoalCount { goal: task.goal().to_vec() }
}

impl Heuristic<State> for GoalCount {
    fn name(&self) -> &str {
        "goal-count"
    }

    fn evaluate(&self, s: &State) -> Result<HeuristicValue, EvalError> {
        Ok(HeuristicValue::finite(self.goal.iter().filter(|&&g| !s.contains(g)).count() as u64))
    }
}

/// A lookup table of precomputed values.
#[derive(Debug, Clone)]
pub struct TableHeuristic<S> {
    name: String,
    values: HashMap<S, HeuristicValue>,
}

impl<S: Hash + Eq> TableHeuristic<S> {
    pub fn new(name: impl Into<String>, values: HashMap<S, HeuristicValue>) -> Self {
        TableHeuristic { name: name.into(), values }
    }

    pub fn get(&self, s: &S) -> Option<HeuristicValue> {
        self.values.get(s).copied()
    }
}

impl<S: Hash + Eq + std::fmt::Debug> Heuristic<S> for TableHeuristic<S> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &S) -> Result<HeuristicValue, EvalError> {
        self.get(s).ok_or_else(|| EvalError::new(format!("no table entry for state {s:?}")))
    }
}

/// The heuristic annotated on an explicit graph's nodes.
pub fn table_heuristic(graph: &ExplicitGraph) -> Result<TableHeuristic<NodeId>, HeuristicError> {
    let mut values = HashMap::new();
    for i in 0..graph.num_nodes() {
        let name = graph.name(NodeId(i));
        let v = graph
            .h_values()
            .get(name)
            .ok_or_else(|| HeuristicError::MissingEntry(name.to_string()))?;
        values.insert(NodeId(i), *v);
    }
    Ok(TableHeuristic::new("table", values))
}

/// The perfect heuristic h* over the reachable states, as a table.
/// Unsolvable states map to infinity.
pub fn perfect_table<T: TransitionSystem>(ts: &T, cap: usize) -> Result<TableHeuristic<T::State>, HeuristicError> {
    let reach = enumerate_reachable(ts, cap)?;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); reach.len()];
    for (from, out) in reach.edges.iter().enumerate() {
        for (_, to) in out {
            preds[*to].push(from);
        }
    }
    let mut dist = vec![u64::MAX; reach.len()];
    let mut queue = std::collections::VecDeque::new();
    for (i, s) in reach.states.iter().enumerate() {
        if ts.is_goal(s) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for &p in &preds[i] {
            if dist[p] == u64::MAX {
                dist[p] = dist[i] + 1;
                queue.push_back(p);
            }
        }
    }
    let values = reach
        .states
        .into_iter()
        .zip(dist)
        .map(|(s, d)| (s, if d == u64::MAX { HeuristicValue::INFINITY } else { HeuristicValue::finite(d) }))
        .collect();
    Ok(TableHeuristic::new("table", values))
}

/// Wraps a closure as a heuristic.
pub struct FnHeuristic<F> {
    name: String,
    f: F,
}

impl<F> FnHeuristic<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnHeuristic { name: name.into(), f }
    }
}

impl<S, F: Fn(&S) -> HeuristicValue> Heuristic<S> for FnHeuristic<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &S) -> Result<HeuristicValue, EvalError> {
        Ok((self.f)(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::GroundAction;

    fn task() -> GroundTask {
        let a = GroundAction { name: "(a)".into(), pre: vec![], add: vec![1, 2], del: vec![] };
        GroundTask::from_parts("t", vec!["(f0)".into(), "(f1)".into(), "(f2)".into()], vec![a], &[0], &[1, 2])
            .unwrap()
    }

    #[test]
    fn blind_values() {
        let t = task();
        let h = blind(&t);
        assert_eq!(h.evaluate(t.initial_state()).unwrap(), HeuristicValue::finite(1));
        let goal = State::from_facts(3, [1, 2]);
        assert_eq!(h.evaluate(&goal).unwrap(), HeuristicValue::ZERO);
        assert_eq!(h.evaluate(&goal).unwrap(), h.evaluate(&goal).unwrap());
    }

    #[test]
    fn goal_count_values() {
        let t = task();
        let h = goal_count(&t);
        assert_eq!(h.evaluate(&State::empty(3)).unwrap(), HeuristicValue::finite(2));
        assert_eq!(h.evaluate(&State::from_facts(3, [0, 1, 2])).unwrap(), HeuristicValue::ZERO);
    }

    #[test]
    fn missing_table_entry() {
        let g = ExplicitGraph::from_json(r#"{"nodes":["a","b"],"edges":[],"initial":"a","goals":["b"],"h":{"a":1}}"#)
            .unwrap();
        assert_eq!(table_heuristic(&g).unwrap_err(), HeuristicError::MissingEntry("b".into()));
    }

    #[test]
    fn perfect_table_is_goal_distance() {
        let t = task();
        let h = perfect_table(&t, 100).unwrap();
        assert_eq!(h.evaluate(t.initial_state()).unwrap(), HeuristicValue::finite(1));
        assert!(h.evaluate(&State::empty(3)).is_err());
    }
}
