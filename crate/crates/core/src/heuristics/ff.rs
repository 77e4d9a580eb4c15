//! The FF heuristic: relaxed planning graph plus best-supporter extraction.

use super::{EvalError, Heuristic, HeuristicError, HeuristicValue};
use crate::pddl::{FactId, GroundTask};
use crate::state_space::State;

const UNREACHED: u32 = u32::MAX;

/// FF bound to one grounded task.
#[derive(Debug, Clone)]
pub struct FfHeuristic {
    num_facts: usize,
    pre: Vec<Vec<FactId>>,
    add: Vec<Vec<FactId>>,
    /// Actions having each fact as a precondition.
    consumers: Vec<Vec<usize>>,
    /// Actions adding each fact, in increasing id order.
    achievers: Vec<Vec<usize>>,
    no_pre: Vec<usize>,
    goal: Vec<FactId>,
}

struct Layers {
    fact: Vec<u32>,
    action: Vec<u32>,
}

pub fn ff(task: &GroundTask) -> FfHeuristic {
    let n = task.num_facts();
    let mut consumers = vec![Vec::new(); n];
    let mut achievers = vec![Vec::new(); n];
    let mut no_pre = Vec::new();
    for (id, a) in task.actions().iter().enumerate() {
        for &p in &a.pre {
            consumers[p].push(id);
        }
        for &f in &a.add {
            achievers[f].push(id);
        }
        if a.pre.is_empty() {
            no_pre.push(id);
        }
    }
    FfHeuristic {
        num_facts: n,
        pre: task.actions().iter().map(|a| a.pre.clone()).collect(),
        add: task.actions().iter().map(|a| a.add.clone()).collect(),
        consumers,
        achievers,
        no_pre,
        goal: task.goal().to_vec(),
    }
}

impl FfHeuristic {
    fn layers(&self, s: &State) -> Layers {
        let mut fact = vec![UNREACHED; self.num_facts];
        let mut action = vec![UNREACHED; self.pre.len()];
        let mut missing: Vec<usize> = self.pre.iter().map(Vec::len).collect();
        let mut frontier: Vec<FactId> = s.iter().collect();
        for &f in &frontier {
            fact[f] = 0;
        }
        let mut ready: Vec<usize> = self.no_pre.clone();
        for &a in &ready {
            action[a] = 0;
        }
        let mut layer = 0u32;
        loop {
            for &f in &frontier {
                for &a in &self.consumers[f] {
                    missing[a] -= 1;
                    if missing[a] == 0 {
                        action[a] = layer;
                        ready.push(a);
                    }
                }
            }
            if self.goal.iter().all(|&g| fact[g] != UNREACHED) {
                break;
            }
            let mut next = Vec::new();
            for a in ready.drain(..) {
                for &f in &self.add[a] {
                    if fact[f] == UNREACHED {
                        fact[f] = layer + 1;
                        next.push(f);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
            layer += 1;
        }
        Layers { fact, action }
    }

    /// Extracts the relaxed plan from `s` as action ids ordered by relaxed
    /// layer, then id. `None` if some goal fact is relaxed-unreachable.
    pub fn relaxed_plan(&self, s: &State) -> Option<Vec<usize>> {
        let layers = self.layers(s);
        if self.goal.iter().any(|&g| layers.fact[g] == UNREACHED) {
            return None;
        }
        let top = self.goal.iter().map(|&g| layers.fact[g]).max().unwrap_or(0) as usize;
        let mut marked = vec![false; self.num_facts];
        let mut open: Vec<Vec<FactId>> = vec![Vec::new(); top + 1];
        for &g in &self.goal {
            let l = layers.fact[g];
            if l > 0 && !marked[g] {
                marked[g] = true;
                open[l as usize].push(g);
            }
        }
        let mut in_plan = vec![false; self.pre.len()];
        let mut plan = Vec::new();
        for layer in (1..=top).rev() {
            let mut i = 0;
            while i < open[layer].len() {
                let f = open[layer][i];
                i += 1;
                // lowest action layer first, then lowest id
                let best = self.achievers[f]
                    .iter()
                    .copied()
                    .filter(|&a| layers.action[a] != UNREACHED)
                    .min_by_key(|&a| (layers.action[a], a))
                    .expect("reached facts have an achiever");
                if in_plan[best] {
                    continue;
                }
                in_plan[best] = true;
                plan.push(best);
                for &p in &self.pre[best] {
                    let l = layers.fact[p];
                    if l > 0 && !marked[p] {
                        marked[p] = true;
                        open[l as usize].push(p);
                    }
                }
            }
        }
        plan.sort_by_key(|&a| (layers.action[a], a));
        Some(plan)
    }
}

impl Heuristic<State> for FfHeuristic {
    fn name(&self) -> &str {
        "ff"
    }

    fn evaluate(&self, s: &State) -> Result<HeuristicValue, EvalError> {
        Ok(match self.relaxed_plan(s) {
            Some(plan) => HeuristicValue::finite(plan.len() as u64),
            None => HeuristicValue::INFINITY,
        })
    }
}

/// The relaxed plan FF extracts from `s`, as action ids in a valid order.
pub fn best_supporter_trace(task: &GroundTask, s: &State) -> Result<Vec<usize>, HeuristicError> {
    ff(task).relaxed_plan(s).ok_or(HeuristicError::Unreachable)
}
