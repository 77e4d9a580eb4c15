mod common;

use std::time::{Duration, Instant};

use common::*;
use dhsynth::candidate_runtime::{spawn, CandidateSource, HeuristicHandle, Origin, RuntimeError, RuntimeLimits, SessionState};
use dhsynth::heuristics::{Heuristic, HeuristicValue};
use dhsynth::repair::{run_repair, Feedback, ProcessRunner, RepairConfig, RepairOutcome, TaskText};
use dhsynth::state_space::TransitionSystem;
use dhsynth::synth::MockSynthesizer;
use dhsynth::validator::check_direct;

fn runner() -> Vec<String> {
    vec![env!("CARGO_BIN_EXE_mock-runner").to_string()]
}

fn limits() -> RuntimeLimits {
    RuntimeLimits {
        handshake_timeout: Duration::from_secs(2),
        eval_timeout: Duration::from_millis(500),
        memory_bytes: None,
        grace: Duration::from_millis(200),
    }
}

fn candidate(builtin: &str) -> CandidateSource {
    CandidateSource::new("python", format!("# builtin: {builtin}\ndef h(state, task):\n    return 0\n"), Origin::Initial).unwrap()
}

fn ferry() -> PddlFixture {
    pddl_fixtures().into_iter().find(|f| f.id == "ferry-p01").unwrap()
}

fn start(builtin: &str) -> Result<HeuristicHandle, RuntimeError> {
    let f = ferry();
    spawn(&runner(), &candidate(builtin), &f.domain_text, &f.task_text, limits())
}

#[test]
fn process_values_match_in_process_values() {
    let f = ferry();
    let mut handle = start("ff").unwrap();
    assert_eq!(*handle.state(), SessionState::Ready);
    let ff = heuristic("ff", &f.task);
    let space = explore(&f.task);
    let states: Vec<_> = space.succ.keys().cloned().collect();
    let facts: Vec<Vec<String>> = states.iter().map(|s| f.task.state_names(s)).collect();
    let got = handle.eval_states(&facts).unwrap();
    let want: Vec<HeuristicValue> = states.iter().map(|s| ff.evaluate(s).unwrap()).collect();
    assert_eq!(got, want);
    let report = handle.shutdown();
    assert!(!report.forced);
    assert!(handle.shutdown().already_dead);
}

#[test]
fn process_heuristic_validates_like_builtin() {
    let f = ferry();
    let runner = ProcessRunner { command: runner(), limits: limits() };
    use dhsynth::repair::CandidateRunner;
    for name in ["goal-count", "perfect"] {
        let h = runner.bind(&candidate(name), &f.task, &f.domain_text, &f.task_text).unwrap();
        let via_process = check_direct(&f.task, &h, Duration::from_secs(30), "ferry").unwrap().verdict;
        let local = check_direct(&f.task, &heuristic(name, &f.task), Duration::from_secs(30), "ferry").unwrap().verdict;
        assert_eq!(via_process, local, "{name}");
    }
}

#[test]
fn load_error_is_reported() {
    let err = start("load-error").unwrap_err();
    assert!(matches!(err, RuntimeError::CandidateLoadError { ref message, .. } if message.contains("SyntaxError")), "{err:?}");
    assert!(err.is_load_phase());
}

#[test]
fn missing_entry_point_is_a_load_error() {
    let f = ferry();
    let c = CandidateSource::new("python", "x = 1\n", Origin::Initial).unwrap();
    let err = spawn(&runner(), &c, &f.domain_text, &f.task_text, limits()).unwrap_err();
    assert!(matches!(err, RuntimeError::CandidateLoadError { .. }), "{err:?}");
}

#[test]
fn crash_on_load_keeps_stderr() {
    let err = start("crash-on-load").unwrap_err();
    assert!(err.is_load_phase(), "{err:?}");
    assert!(err.stderr_tail().unwrap_or_default().contains("ImportError"), "{err:?}");
}

#[test]
fn slow_handshake_times_out() {
    let t = Instant::now();
    let err = start("slow-handshake").unwrap_err();
    assert!(matches!(err, RuntimeError::HandshakeTimeout { .. }), "{err:?}");
    assert!(t.elapsed() < Duration::from_secs(10));
}

fn first_eval(builtin: &str) -> (HeuristicHandle, RuntimeError) {
    let f = ferry();
    let mut handle = start(builtin).unwrap();
    let err = handle.eval_state(&f.task.state_names(&f.task.initial())).unwrap_err();
    (handle, err)
}

#[test]
fn hanging_eval_times_out_and_kills() {
    let t = Instant::now();
    let (handle, err) = first_eval("hang");
    assert!(matches!(err, RuntimeError::EvalTimeout { .. }), "{err:?}");
    assert!(matches!(handle.state(), SessionState::Dead(_)));
    assert!(t.elapsed() < Duration::from_secs(10));
}

#[test]
fn crash_during_eval_reports_traceback() {
    let (_, err) = first_eval("crash");
    assert!(matches!(err, RuntimeError::ChildCrashed { .. }), "{err:?}");
    assert!(err.stderr_tail().unwrap().contains("ZeroDivisionError"));
    assert!(!err.is_load_phase());
}

#[test]
fn negative_values_are_rejected() {
    let (_, err) = first_eval("negative");
    assert!(!err.is_load_phase(), "{err:?}");
}

#[test]
fn garbage_output_is_a_protocol_violation() {
    let (_, err) = first_eval("garbage");
    assert!(matches!(err, RuntimeError::ProtocolViolation { ref raw, .. } if raw.contains("debug")), "{err:?}");
}

#[test]
fn dead_handle_refuses_work() {
    let f = ferry();
    let (mut handle, _) = first_eval("crash");
    let err = handle.eval_state(&f.task.state_names(&f.task.initial())).unwrap_err();
    assert!(matches!(err, RuntimeError::NotReady(_)), "{err:?}");
}

#[test]
fn stubborn_child_is_killed_after_grace() {
    let mut handle = start("ignore-shutdown").unwrap();
    let t = Instant::now();
    let report = handle.shutdown();
    assert!(report.forced);
    assert!(t.elapsed() < Duration::from_secs(5));
}

#[test]
fn repair_loop_through_child_processes() {
    let f = ferry();
    let config = RepairConfig::new(f.domain_text.clone(), vec![TaskText { id: "ferry/p01".into(), text: f.task_text.clone() }]);
    let responses: Vec<String> = ["crash", "goal-count", "perfect"]
        .iter()
        .map(|b| format!("```python\n# builtin: {b}\ndef h(state, task):\n    return 0\n```"))
        .collect();
    let mut synth = MockSynthesizer::new(responses);
    let runner = ProcessRunner { command: runner(), limits: limits() };
    let result = run_repair(&config, &mut synth, &runner).unwrap();
    assert!(matches!(result.outcome, RepairOutcome::Converged(_)));
    let feedback: Vec<_> = result.transcript.iterations.iter().map(|i| i.feedback.clone()).collect();
    assert!(matches!(&feedback[0], Some(Feedback::Error { stderr_tail: Some(t), .. }) if t.contains("ZeroDivisionError")), "{feedback:?}");
    assert!(matches!(&feedback[1], Some(Feedback::Counterexample(_))));
    assert!(feedback[2].is_none());
}

#[test]
fn process_heuristic_failure_surfaces_in_validation() {
    let f = ferry();
    let runner = ProcessRunner { command: runner(), limits: limits() };
    use dhsynth::repair::CandidateRunner;
    let h = runner.bind(&candidate("crash"), &f.task, &f.domain_text, &f.task_text).unwrap();
    let err = check_direct(&f.task, &h, Duration::from_secs(30), "ferry").unwrap_err();
    assert!(err.to_string().contains("exited"), "{err}");
}
