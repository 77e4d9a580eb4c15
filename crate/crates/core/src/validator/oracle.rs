//! Exact verdicts by exhaustive enumeration, for small state spaces.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::heuristics::{EvalError, Heuristic, HeuristicValue};
use crate::state_space::{enumerate_reachable, StateSpaceError, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
    #[error("heuristic evaluation failed: {0}")]
    Evaluation(#[from] EvalError),
}

/// Why an oracle rejected a heuristic. States are given as descriptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The initial state is neither a goal nor solvable.
    InitialUnsolvable,
    NoImprovingSuccessor { state: Vec<String> },
    ImprovingToDeadEnd { state: Vec<String>, successor: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Pass,
    Fail(Violation),
}

impl OracleVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, OracleVerdict::Pass)
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport<S> {
    pub verdict: OracleVerdict,
    /// The alive states reachable from the initial state via strictly
    /// improving transitions through alive states.
    pub s_down: Vec<S>,
}

struct Space<S> {
    states: Vec<S>,
    edges: Vec<Vec<usize>>,
    h: Vec<HeuristicValue>,
    goal: Vec<bool>,
    solvable: Vec<bool>,
}

impl<S> Space<S> {
    fn alive(&self, i: usize) -> bool {
        self.solvable[i] && !self.goal[i]
    }

    fn improving(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[i].iter().copied().filter(move |&j| self.h[j] < self.h[i])
    }
}

fn explore<T, H>(ts: &T, h: &H, cap: usize) -> Result<Space<T::State>, OracleError>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let reach = enumerate_reachable(ts, cap)?;
    let solvable = reach.solvable(|s| ts.is_goal(s));
    let h = h.evaluate_batch(&reach.states)?;
    let goal = reach.states.iter().map(|s| ts.is_goal(s)).collect();
    let edges = reach.edges.into_iter().map(|out| out.into_iter().map(|(_, j)| j).collect()).collect();
    Ok(Space { states: reach.states, edges, h, goal, solvable })
}

/// Computes S↓ and decides whether `h` is direct on the task.
pub fn oracle_direct<T, H>(ts: &T, h: &H, cap: usize) -> Result<OracleReport<T::State>, OracleError>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let space = explore(ts, h, cap)?;
    if space.goal[0] {
        return Ok(OracleReport { verdict: OracleVerdict::Pass, s_down: Vec::new() });
    }
    if !space.solvable[0] {
        return Ok(OracleReport { verdict: OracleVerdict::Fail(Violation::InitialUnsolvable), s_down: Vec::new() });
    }
    let mut member = HashSet::from([0usize]);
    let mut order = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    let mut violation = None;
    while let Some(i) = queue.pop_front() {
        let mut any = false;
        for j in space.improving(i) {
            any = true;
            if space.alive(j) {
                if member.insert(j) {
                    order.push(j);
                    queue.push_back(j);
                }
            } else if !space.goal[j] && violation.is_none() {
                violation = Some(Violation::ImprovingToDeadEnd {
                    state: ts.describe(&space.states[i]),
                    successor: ts.describe(&space.states[j]),
                });
            }
        }
        if !any && violation.is_none() {
            violation = Some(Violation::NoImprovingSuccessor { state: ts.describe(&space.states[i]) });
        }
    }
    let verdict = violation.map_or(OracleVerdict::Pass, OracleVerdict::Fail);
    let s_down = order.into_iter().map(|i| space.states[i].clone()).collect();
    Ok(OracleReport { verdict, s_down })
}

/// Decides whether `h` is descending and dead-end avoiding over all alive
/// states.
pub fn oracle_dda<T, H>(ts: &T, h: &H, cap: usize) -> Result<OracleVerdict, OracleError>
where
    T: TransitionSystem,
    H: Heuristic<T::State> + ?Sized,
{
    let space = explore(ts, h, cap)?;
    if !space.goal[0] && !space.solvable[0] {
        return Ok(OracleVerdict::Fail(Violation::InitialUnsolvable));
    }
    for i in (0..space.states.len()).filter(|&i| space.alive(i)) {
        let mut any = false;
        for j in space.improving(i) {
            any = true;
            if !space.solvable[j] {
                return Ok(OracleVerdict::Fail(Violation::ImprovingToDeadEnd {
                    state: ts.describe(&space.states[i]),
                    successor: ts.describe(&space.states[j]),
                }));
            }
        }
        if !any {
            return Ok(OracleVerdict::Fail(Violation::NoImprovingSuccessor { state: ts.describe(&space.states[i]) }));
        }
    }
    Ok(OracleVerdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::table_heuristic;
    use crate::state_space::ExplicitGraph;

    fn graph(h: &[u64]) -> ExplicitGraph {
        let names = ["s0", "a", "b", "c", "d", "g"];
        let h: Vec<String> = names.iter().zip(h).map(|(n, v)| format!("\"{n}\":{v}")).collect();
        ExplicitGraph::from_json(&format!(
            r#"{{"nodes":["s0","a","b","c","d","g"],"edges":[["s0","s0-a","a"],["s0","s0-b","b"],["a","a-c","c"],["b","b-d","d"],["c","c-g","g"],["d","d-g","g"]],"initial":"s0","goals":["g"],"h":{{{}}}}}"#,
            h.join(",")
        ))
        .unwrap()
    }

    fn names(g: &ExplicitGraph, s: &[crate::state_space::NodeId]) -> Vec<String> {
        s.iter().map(|&n| g.name(n).to_string()).collect()
    }

    #[test]
    fn fig2a_pass_pass() {
        let g = graph(&[3, 3, 2, 2, 1, 0]);
        let h = table_heuristic(&g).unwrap();
        let r = oracle_direct(&g, &h, 100).unwrap();
        assert!(r.verdict.is_pass());
        assert_eq!(names(&g, &r.s_down), ["s0", "b", "d"]);
        assert!(oracle_dda(&g, &h, 100).unwrap().is_pass());
    }

    #[test]
    fn fig2b_direct_not_dda() {
        let g = graph(&[3, 3, 2, 3, 1, 0]);
        let h = table_heuristic(&g).unwrap();
        let r = oracle_direct(&g, &h, 100).unwrap();
        assert!(r.verdict.is_pass());
        assert!(!names(&g, &r.s_down).contains(&"a".to_string()));
        assert_eq!(
            oracle_dda(&g, &h, 100).unwrap(),
            OracleVerdict::Fail(Violation::NoImprovingSuccessor { state: vec!["a".into()] })
        );
    }

    #[test]
    fn flat_fig2b_fails() {
        let g = graph(&[3, 3, 3, 3, 1, 0]);
        let r = oracle_direct(&g, &table_heuristic(&g).unwrap(), 100).unwrap();
        assert_eq!(r.verdict, OracleVerdict::Fail(Violation::NoImprovingSuccessor { state: vec!["s0".into()] }));
        assert_eq!(names(&g, &r.s_down), ["s0"]);
    }

    #[test]
    fn goal_only_vacuous() {
        let g = ExplicitGraph::from_json(r#"{"nodes":["s0"],"edges":[],"initial":"s0","goals":["s0"],"h":{"s0":0}}"#)
            .unwrap();
        let h = table_heuristic(&g).unwrap();
        assert!(oracle_dda(&g, &h, 10).unwrap().is_pass());
        assert!(oracle_direct(&g, &h, 10).unwrap().verdict.is_pass());
    }

    #[test]
    fn unsolvable_initial_fails_both() {
        let g = ExplicitGraph::from_json(
            r#"{"nodes":["s0","t"],"edges":[["s0","go","t"]],"initial":"s0","goals":[],"h":{"s0":1,"t":1}}"#,
        )
        .unwrap();
        let h = table_heuristic(&g).unwrap();
        assert_eq!(oracle_dda(&g, &h, 10).unwrap(), OracleVerdict::Fail(Violation::InitialUnsolvable));
        assert_eq!(oracle_direct(&g, &h, 10).unwrap().verdict, OracleVerdict::Fail(Violation::InitialUnsolvable));
    }

    #[test]
    fn improving_into_dead_end() {
        let g = ExplicitGraph::from_json(
            r#"{"nodes":["s0","x","y","g"],"edges":[["s0","go-x","x"],["s0","go-y","y"],["y","y-g","g"]],"initial":"s0","goals":["g"],"h":{"s0":2,"x":1,"y":1,"g":0}}"#,
        )
        .unwrap();
        let h = table_heuristic(&g).unwrap();
        let expected = Violation::ImprovingToDeadEnd { state: vec!["s0".into()], successor: vec!["x".into()] };
        assert_eq!(oracle_direct(&g, &h, 10).unwrap().verdict, OracleVerdict::Fail(expected.clone()));
        assert_eq!(oracle_dda(&g, &h, 10).unwrap(), OracleVerdict::Fail(expected));
    }

    #[test]
    fn cap_is_enforced() {
        let g = graph(&[3, 3, 2, 2, 1, 0]);
        assert!(matches!(
            oracle_direct(&g, &table_heuristic(&g).unwrap(), 2),
            Err(OracleError::StateSpace(StateSpaceError::StateSpaceTooLarge(2)))
        ));
    }
}
