use crate::candidate_runtime::builtin::{builtin_directive, builtin_heuristic};
use crate::candidate_runtime::{spawn, CandidateSource, ProcessHeuristic, RuntimeError, RuntimeLimits};
use crate::heuristics::Heuristic;
use crate::pddl::GroundTask;
use crate::state_space::State;

/// Turns a candidate into a heuristic bound to one task.
pub trait CandidateRunner {
    fn bind<'t>(
        &self,
        candidate: &CandidateSource,
        task: &'t GroundTask,
        domain_text: &str,
        task_text: &str,
    ) -> Result<Box<dyn Heuristic<State> + 't>, RuntimeError>;
}

/// Runs candidates in-process through their `# builtin: NAME` directive.
/// Candidates without a directive fail to load.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinRunner;

impl CandidateRunner for BuiltinRunner {
    fn bind<'t>(
        &self,
        candidate: &CandidateSource,
        task: &'t GroundTask,
        _domain_text: &str,
        _task_text: &str,
    ) -> Result<Box<dyn Heuristic<State> + 't>, RuntimeError> {
        let load_error = |message: String| RuntimeError::CandidateLoadError { message, stderr_tail: String::new() };
        let name = builtin_directive(&candidate.code)
            .ok_or_else(|| load_error("candidate has no builtin directive".into()))?;
        builtin_heuristic(name, task).ok_or_else(|| load_error(format!("unknown builtin `{name}`")))
    }
}

/// Runs each candidate in a fresh child process per task.
#[derive(Debug, Clone)]
pub struct ProcessRunner {
    pub command: Vec<String>,
    pub limits: RuntimeLimits,
}

impl CandidateRunner for ProcessRunner {
    fn bind<'t>(
        &self,
        candidate: &CandidateSource,
        task: &'t GroundTask,
        domain_text: &str,
        task_text: &str,
    ) -> Result<Box<dyn Heuristic<State> + 't>, RuntimeError> {
        let handle = spawn(&self.command, candidate, domain_text, task_text, self.limits)?;
        Ok(Box::new(ProcessHeuristic::new(task, handle, format!("candidate-{}", &candidate.id[..8]))))
    }
}
