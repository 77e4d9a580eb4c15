//! Built-in stand-ins for candidate programs.
//!
//! A candidate whose code contains a line `# builtin: NAME` can be run
//! without an interpreter: the mock runner and the in-process runner
//! substitute the named heuristic for the code.

use crate::heuristics::{blind, ff, goal_count, perfect_table, FnHeuristic, Heuristic, HeuristicValue};
use crate::pddl::GroundTask;
use crate::state_space::State;

/// Reachable-state cap for the `perfect` builtin.
pub const PERFECT_CAP: usize = 100_000;

/// Names accepted by [`builtin_heuristic`].
pub const BUILTINS: &[&str] = &["goal-count", "blind", "ff", "perfect", "zero", "constant", "inf"];

/// The name after `# builtin:` on the first such line, if any.
pub fn builtin_directive(code: &str) -> Option<&str> {
    code.lines().find_map(|l| l.trim().strip_prefix("# builtin:")).map(str::trim)
}

pub fn builtin_heuristic<'t>(name: &str, task: &'t GroundTask) -> Option<Box<dyn Heuristic<State> + 't>> {
    Some(match name {
        "goal-count" => Box::new(goal_count(task)),
        "blind" => Box::new(blind(task)),
        "ff" => Box::new(ff(task)),
        "perfect" => Box::new(perfect_table(task, PERFECT_CAP).ok()?),
        "zero" => Box::new(FnHeuristic::new("zero", |_: &State| HeuristicValue::ZERO)),
        "constant" => Box::new(FnHeuristic::new("constant", |_: &State| HeuristicValue::finite(1))),
        "inf" => Box::new(FnHeuristic::new("inf", |_: &State| HeuristicValue::INFINITY)),
        _ => return None,
    })
}
