//! Hill climbing and eager greedy best-first search.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::heuristics::{EvalError, Heuristic, HeuristicValue};
use crate::state_space::TransitionSystem;

/// Resource limits for one search. Memory is enforced by the process
/// supervisor in `bench`, not here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub wall_time: Duration,
    pub max_expansions: Option<u64>,
    pub max_generated: Option<u64>,
}

impl Limits {
    pub fn time(wall_time: Duration) -> Self {
        Limits { wall_time, max_expansions: None, max_generated: None }
    }

    pub fn with_max_expansions(mut self, n: u64) -> Self {
        self.max_expansions = Some(n);
        self
    }

    pub fn with_max_generated(mut self, n: u64) -> Self {
        self.max_generated = Some(n);
        self
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits::time(Duration::from_secs(300))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// States whose successors were generated.
    pub expansions: u64,
    pub generated: u64,
    pub evaluations: u64,
    pub peak_open: u64,
    #[serde(with = "millis")]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<S> {
    Plan(Vec<String>),
    /// Hill climbing found no strictly improving successor.
    Stuck { state: S, h: HeuristicValue, successors: Vec<(String, HeuristicValue)> },
    Exhausted,
    Timeout,
    HeuristicFailure(EvalError),
}

impl<S> Outcome<S> {
    pub fn plan(&self) -> Option<&[String]> {
        match self {
            Outcome::Plan(p) => Some(p),
            _ => None,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Plan(_) => "plan",
            Outcome::Stuck { .. } => "stuck",
            Outcome::Exhausted => "exhausted",
            Outcome::Timeout => "timeout",
            Outcome::HeuristicFailure(_) => "error(heuristic)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<S> {
    pub outcome: Outcome<S>,
    pub stats: SearchStats,
}

struct Budget {
    start: Instant,
    limits: Limits,
}

impl Budget {
    fn new(limits: Limits) -> Self {
        Budget { start: Instant::now(), limits }
    }

    fn exceeded(&self, stats: &SearchStats) -> bool {
        self.start.elapsed() >= self.limits.wall_time
            || self.limits.max_expansions.is_some_and(|m| stats.expansions >= m)
            || self.limits.max_generated.is_some_and(|m| stats.generated >= m)
    }

    fn finish<S>(&self, outcome: Outcome<S>, mut stats: SearchStats) -> SearchResult<S> {
        stats.wall_time = self.start.elapsed();
        SearchResult { outcome, stats }
    }
}

/// Steepest-descent hill climbing: moves to the successor with the smallest
/// strictly improving value, ties broken by successor order.
pub fn hill_climb<T, H>(ts: &T, h: &H, limits: Limits) -> SearchResult<T::State>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let budget = Budget::new(limits);
    let mut stats = SearchStats { peak_open: 1, ..Default::default() };
    let mut current = ts.initial();
    let mut h_current = match h.evaluate(&current) {
        Ok(v) => v,
        Err(e) => return budget.finish(Outcome::HeuristicFailure(e), stats),
    };
    stats.evaluations += 1;
    let mut plan = Vec::new();
    loop {
        if budget.exceeded(&stats) {
            return budget.finish(Outcome::Timeout, stats);
        }
        if ts.is_goal(&current) {
            return budget.finish(Outcome::Plan(plan), stats);
        }
        let successors = ts.successors(&current);
        stats.expansions += 1;
        log::trace!("hc expansion {}: h = {h_current}, {} successors", stats.expansions, successors.len());
        stats.generated += successors.len() as u64;
        let states: Vec<_> = successors.iter().map(|(_, s)| s.clone()).collect();
        let values = match h.evaluate_batch(&states) {
            Ok(v) => v,
            Err(e) => return budget.finish(Outcome::HeuristicFailure(e), stats),
        };
        stats.evaluations += values.len() as u64;
        let best = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < h_current)
            .min_by_key(|(i, v)| (**v, *i))
            .map(|(i, _)| i);
        let Some(i) = best else {
            let report = successors.iter().zip(&values).map(|((l, _), v)| (l.to_string(), *v)).collect();
            return budget.finish(Outcome::Stuck { state: current, h: h_current, successors: report }, stats);
        };
        let (label, next) = successors.into_iter().nth(i).expect("index in range");
        plan.push(label.to_string());
        current = next;
        h_current = values[i];
    }
}

struct Node<S> {
    state: S,
    parent: Option<(usize, String)>,
}

/// Eager greedy best-first search with FIFO tie-breaking and a closed set in
/// which the first insertion of a state wins.
pub fn gbfs<T, H>(ts: &T, h: &H, limits: Limits) -> SearchResult<T::State>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let budget = Budget::new(limits);
    let mut stats = SearchStats::default();
    let s0 = ts.initial();
    let h0 = match h.evaluate(&s0) {
        Ok(v) => v,
        Err(e) => return budget.finish(Outcome::HeuristicFailure(e), stats),
    };
    stats.evaluations += 1;
    let mut seen: HashSet<T::State> = HashSet::from([s0.clone()]);
    let mut nodes = vec![Node { state: s0, parent: None }];
    let mut open = BinaryHeap::from([Reverse((h0, 0usize))]);
    stats.peak_open = 1;
    while let Some(Reverse((h_node, id))) = open.pop() {
        if budget.exceeded(&stats) {
            return budget.finish(Outcome::Timeout, stats);
        }
        if ts.is_goal(&nodes[id].state) {
            return budget.finish(Outcome::Plan(extract(&nodes, id)), stats);
        }
        let successors = ts.successors(&nodes[id].state);
        stats.expansions += 1;
        log::trace!("gbfs expansion {}: h = {h_node}, {} successors", stats.expansions, successors.len());
        stats.generated += successors.len() as u64;
        let fresh: Vec<_> = successors.into_iter().filter(|(_, s)| !seen.contains(s)).collect();
        // a state may appear twice among one expansion's successors
        let mut batch = Vec::with_capacity(fresh.len());
        for (label, s) in fresh {
            if seen.insert(s.clone()) {
                batch.push((label, s));
            }
        }
        let states: Vec<_> = batch.iter().map(|(_, s)| s.clone()).collect();
        let values = match h.evaluate_batch(&states) {
            Ok(v) => v,
            Err(e) => return budget.finish(Outcome::HeuristicFailure(e), stats),
        };
        stats.evaluations += values.len() as u64;
        for ((label, s), v) in batch.into_iter().zip(values) {
            let child = nodes.len();
            nodes.push(Node { state: s, parent: Some((id, label.to_string())) });
            // node ids grow with generation order, so they break ties FIFO
            open.push(Reverse((v, child)));
        }
        stats.peak_open = stats.peak_open.max(open.len() as u64);
    }
    budget.finish(Outcome::Exhausted, stats)
}

fn extract<S>(nodes: &[Node<S>], mut id: usize) -> Vec<String> {
    let mut plan = Vec::new();
    while let Some((parent, label)) = &nodes[id].parent {
        plan.push(label.clone());
        id = *parent;
    }
    plan.reverse();
    plan
}

mod millis {
    use std::time::Duration;

    use serde::Serializer;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }
}
