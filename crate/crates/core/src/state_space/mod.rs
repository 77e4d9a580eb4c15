//! Successor generation and the transition-system abstraction shared by
//! grounded tasks and explicit graphs.

mod graph;
mod state;

use std::collections::{HashMap, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

pub use graph::{ExplicitGraph, NodeId};
pub use state::State;

use crate::pddl::{GroundAction, GroundTask};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateSpaceError {
    #[error("action {0} is not applicable")]
    InapplicableAction(String),
    #[error("state space exceeds the cap of {0} states")]
    StateSpaceTooLarge(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

/// A deterministic, finite transition system.
///
/// `successors` must return the same ordered list for equal states.
pub trait TransitionSystem {
    type State: Clone + Eq + Hash + Debug;

    fn initial(&self) -> Self::State;
    fn is_goal(&self, s: &Self::State) -> bool;
    fn successors<'a>(&'a self, s: &Self::State) -> Vec<(&'a str, Self::State)>;
    /// Printable description of a state, sorted lexicographically.
    fn describe(&self, s: &Self::State) -> Vec<String>;
}

/// Actions with `pre ⊆ s`, in grounding order.
pub fn applicable_actions<'t>(task: &'t GroundTask, s: &State) -> Vec<&'t GroundAction> {
    task.actions().iter().filter(|a| s.contains_all(&a.pre)).collect()
}

/// Applies `a` to `s`: `(s \ del) ∪ add`.
pub fn apply(s: &State, a: &GroundAction) -> Result<State, StateSpaceError> {
    if !s.contains_all(&a.pre) {
        return Err(StateSpaceError::InapplicableAction(a.name.clone()));
    }
    Ok(apply_unchecked(s, a))
}

#[inline]
fn apply_unchecked(s: &State, a: &GroundAction) -> State {
    let mut next = s.clone();
    for &f in &a.del {
        next.remove(f);
    }
    for &f in &a.add {
        next.insert(f);
    }
    next
}

impl TransitionSystem for GroundTask {
    type State = State;

    fn initial(&self) -> State {
        self.initial_state().clone()
    }

    fn is_goal(&self, s: &State) -> bool {
        self.is_goal_state(s)
    }

    fn successors<'a>(&'a self, s: &State) -> Vec<(&'a str, State)> {
        self.actions()
            .iter()
            .filter(|a| s.contains_all(&a.pre))
            .map(|a| (a.name.as_str(), apply_unchecked(s, a)))
            .collect()
    }

    fn describe(&self, s: &State) -> Vec<String> {
        self.state_names(s)
    }
}

impl<T: TransitionSystem + ?Sized> TransitionSystem for &T {
    type State = T::State;

    fn initial(&self) -> Self::State {
        (**self).initial()
    }
    fn is_goal(&self, s: &Self::State) -> bool {
        (**self).is_goal(s)
    }
    fn successors<'a>(&'a self, s: &Self::State) -> Vec<(&'a str, Self::State)> {
        (**self).successors(s)
    }
    fn describe(&self, s: &Self::State) -> Vec<String> {
        (**self).describe(s)
    }
}

/// The reachable states of a transition system in BFS order, with the edge
/// used to first reach each state.
#[derive(Debug, Clone)]
pub struct Reachable<S> {
    pub states: Vec<S>,
    pub index: HashMap<S, usize>,
    /// `parents[i]` is the (state index, label) that first generated state `i`.
    pub parents: Vec<Option<(usize, String)>>,
    /// Outgoing edges per state as (label, target index), in successor order.
    pub edges: Vec<Vec<(String, usize)>>,
}

impl<S: Clone + Eq + Hash> Reachable<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: &S) -> bool {
        self.index.contains_key(s)
    }

    /// Labels leading from the initial state to state `i`.
    pub fn path_to(&self, mut i: usize) -> Vec<String> {
        let mut labels = Vec::new();
        while let Some((parent, label)) = &self.parents[i] {
            labels.push(label.clone());
            i = *parent;
        }
        labels.reverse();
        labels
    }

    /// Which states can reach a goal, by backward search over `edges`.
    pub fn solvable(&self, is_goal: impl Fn(&S) -> bool) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.states.len()];
        for (from, out) in self.edges.iter().enumerate() {
            for (_, to) in out {
                preds[*to].push(from);
            }
        }
        let mut solvable = vec![false; self.states.len()];
        let mut queue = VecDeque::new();
        for (i, s) in self.states.iter().enumerate() {
            if is_goal(s) {
                solvable[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &p in &preds[i] {
                if !solvable[p] {
                    solvable[p] = true;
                    queue.push_back(p);
                }
            }
        }
        solvable
    }
}

/// Breadth-first closure from the initial state.
pub fn enumerate_reachable<T: TransitionSystem>(ts: &T, cap: usize) -> Result<Reachable<T::State>, StateSpaceError> {
    let s0 = ts.initial();
    let mut r = Reachable {
        states: vec![s0.clone()],
        index: HashMap::from([(s0, 0)]),
        parents: vec![None],
        edges: vec![Vec::new()],
    };
    if cap == 0 {
        return Err(StateSpaceError::StateSpaceTooLarge(cap));
    }
    let mut next = 0;
    while next < r.states.len() {
        let current = r.states[next].clone();
        let mut out = Vec::new();
        for (label, succ) in ts.successors(&current) {
            let id = match r.index.get(&succ) {
                Some(&id) => id,
                None => {
                    if r.states.len() >= cap {
                        return Err(StateSpaceError::StateSpaceTooLarge(cap));
                    }
                    let id = r.states.len();
                    r.index.insert(succ.clone(), id);
                    r.states.push(succ);
                    r.parents.push(Some((next, label.to_string())));
                    r.edges.push(Vec::new());
                    id
                }
            };
            out.push((label.to_string(), id));
        }
        r.edges[next] = out;
        next += 1;
    }
    Ok(r)
}

/// Replays `labels` from the initial state, following the first successor
/// carrying each label. Returns the visited states including the initial one.
pub fn replay<T: TransitionSystem>(ts: &T, labels: &[String]) -> Option<Vec<T::State>> {
    let mut current = ts.initial();
    let mut trace = vec![current.clone()];
    for label in labels {
        let (_, next) = ts.successors(&current).into_iter().find(|(l, _)| l == label)?;
        current = next;
        trace.push(current.clone());
    }
    Some(trace)
}
