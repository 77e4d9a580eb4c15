//! Runs untrusted candidate heuristics in child processes and exposes them
//! as [`Heuristic`] values.
//!
//! The child speaks the line-delimited JSON protocol in [`protocol`]. The
//! runner command is an argv template; `{code_file}` and `{workdir}` are
//! replaced by the path of the candidate's code and its private working
//! directory.

pub mod builtin;
pub mod protocol;

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::heuristics::{EvalError, Heuristic, HeuristicValue};
use crate::pddl::GroundTask;
use crate::state_space::State;
use protocol::{Reply, Request};

const STDERR_TAIL_BYTES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Initial,
    Repair(u32),
}

/// Candidate program text. The id is the SHA-256 of the code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSource {
    pub language_tag: String,
    pub code: String,
    pub origin: Origin,
    pub id: String,
}

impl CandidateSource {
    pub fn new(language_tag: impl Into<String>, code: impl Into<String>, origin: Origin) -> Result<Self, RuntimeError> {
        let code = code.into();
        if code.trim().is_empty() {
            return Err(RuntimeError::EmptyCode);
        }
        let id = Sha256::digest(code.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(CandidateSource { language_tag: language_tag.into(), code, origin, id })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuntimeLimits {
    pub handshake_timeout: Duration,
    /// Bound on one eval round trip.
    pub eval_timeout: Duration,
    /// Address-space limit for the child, in bytes.
    pub memory_bytes: Option<u64>,
    /// Time allowed for a polite shutdown before the child is killed.
    pub grace: Duration,
}

impl Default for RuntimeLimits {
    fn default() -> Self {
        RuntimeLimits {
            handshake_timeout: Duration::from_secs(10),
            eval_timeout: Duration::from_secs(1),
            memory_bytes: None,
            grace: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("candidate code is empty")]
    EmptyCode,
    #[error("could not start runner: {message}")]
    SpawnFailure { message: String, stderr_tail: String },
    #[error("runner did not become ready in time")]
    HandshakeTimeout { stderr_tail: String },
    #[error("candidate failed to load: {message}")]
    CandidateLoadError { message: String, stderr_tail: String },
    #[error("protocol violation: {raw}")]
    ProtocolViolation { raw: String, stderr_tail: String },
    #[error("candidate process exited ({exit})")]
    ChildCrashed { exit: String, stderr_tail: String },
    #[error("evaluation timed out")]
    EvalTimeout { stderr_tail: String },
    #[error("handle is not ready: {0}")]
    NotReady(String),
}

impl RuntimeError {
    pub fn stderr_tail(&self) -> Option<&str> {
        match self {
            RuntimeError::SpawnFailure { stderr_tail, .. }
            | RuntimeError::HandshakeTimeout { stderr_tail }
            | RuntimeError::CandidateLoadError { stderr_tail, .. }
            | RuntimeError::ProtocolViolation { stderr_tail, .. }
            | RuntimeError::ChildCrashed { stderr_tail, .. }
            | RuntimeError::EvalTimeout { stderr_tail } => Some(stderr_tail),
            _ => None,
        }
    }

    /// Whether the failure happened while loading the candidate rather than
    /// while evaluating it.
    pub fn is_load_phase(&self) -> bool {
        matches!(
            self,
            RuntimeError::EmptyCode
                | RuntimeError::SpawnFailure { .. }
                | RuntimeError::HandshakeTimeout { .. }
                | RuntimeError::CandidateLoadError { .. }
        )
    }
}

impl From<RuntimeError> for EvalError {
    fn from(e: RuntimeError) -> Self {
        let stderr_tail = e.stderr_tail().filter(|t| !t.is_empty()).map(str::to_string);
        EvalError { message: e.to_string(), stderr_tail }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionState {
    Initializing,
    Ready,
    Dead(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitReport {
    /// The child had to be killed after the grace period.
    pub forced: bool,
    pub status: Option<String>,
    /// The handle was already dead; nothing was done.
    pub already_dead: bool,
}

#[derive(Clone, Default)]
struct StderrTail(Arc<Mutex<VecDeque<u8>>>);

impl StderrTail {
    fn push(&self, bytes: &[u8]) {
        let mut buf = self.0.lock().expect("stderr buffer poisoned");
        buf.extend(bytes);
        let excess = buf.len().saturating_sub(STDERR_TAIL_BYTES);
        buf.drain(..excess);
    }

    fn get(&self) -> String {
        let buf = self.0.lock().expect("stderr buffer poisoned");
        String::from_utf8_lossy(&buf.iter().copied().collect::<Vec<_>>()).into_owned()
    }
}

/// A live session with one candidate bound to one task.
pub struct HeuristicHandle {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    stderr: StderrTail,
    state: SessionState,
    task_binding: String,
    next_id: u64,
    limits: RuntimeLimits,
    _workdir: tempfile::TempDir,
}

impl fmt::Debug for HeuristicHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeuristicHandle")
            .field("pid", &self.child.id())
            .field("task", &self.task_binding)
            .field("state", &self.state)
            .finish()
    }
}

/// Starts the runner, sends the init message and waits for `ready`.
pub fn spawn(
    runner: &[String],
    candidate: &CandidateSource,
    domain_text: &str,
    task_text: &str,
    limits: RuntimeLimits,
) -> Result<HeuristicHandle, RuntimeError> {
    let spawn_failure = |message: String| RuntimeError::SpawnFailure { message, stderr_tail: String::new() };
    let (program, args) = runner.split_first().ok_or_else(|| spawn_failure("empty runner command".into()))?;
    let workdir = tempfile::tempdir().map_err(|e| spawn_failure(e.to_string()))?;
    let code_file = workdir.path().join("candidate.py");
    std::fs::write(&code_file, &candidate.code).map_err(|e| spawn_failure(e.to_string()))?;
    let substitute = |a: &String| {
        a.replace("{code_file}", &code_file.to_string_lossy()).replace("{workdir}", &workdir.path().to_string_lossy())
    };

    let mut cmd = Command::new(program);
    cmd.args(args.iter().map(substitute))
        .current_dir(workdir.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(bytes) = limits.memory_bytes {
        set_memory_limit(&mut cmd, bytes);
    }
    let mut child = cmd.spawn().map_err(|e| spawn_failure(format!("{program}: {e}")))?;

    let stdout = child.stdout.take().expect("stdout piped");
    let (tx, lines) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    let stderr = StderrTail::default();
    let mut err_pipe = child.stderr.take().expect("stderr piped");
    let sink = stderr.clone();
    thread::spawn(move || {
        let mut buf = [0u8; 1024];
        while let Ok(n) = err_pipe.read(&mut buf) {
            if n == 0 {
                break;
            }
            sink.push(&buf[..n]);
        }
    });

    let mut handle = HeuristicHandle {
        stdin: child.stdin.take(),
        child,
        lines,
        stderr,
        state: SessionState::Initializing,
        task_binding: Sha256::digest(task_text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect(),
        next_id: 0,
        limits,
        _workdir: workdir,
    };
    handle.send(&Request::Init {
        domain_pddl: domain_text.to_string(),
        task_pddl: task_text.to_string(),
        code: candidate.code.clone(),
    })?;
    match handle.receive(limits.handshake_timeout) {
        Ok(Reply::Ready) => {
            handle.state = SessionState::Ready;
            Ok(handle)
        }
        Ok(Reply::LoadError { message }) => {
            let e = RuntimeError::CandidateLoadError { message, stderr_tail: handle.stderr_tail() };
            Err(handle.die(e))
        }
        Ok(other) => {
            let e = RuntimeError::ProtocolViolation { raw: format!("{other:?}"), stderr_tail: handle.stderr_tail() };
            Err(handle.die(e))
        }
        Err(RuntimeError::EvalTimeout { stderr_tail }) => Err(handle.die(RuntimeError::HandshakeTimeout { stderr_tail })),
        Err(RuntimeError::ChildCrashed { exit, stderr_tail }) => {
            let message = format!("runner exited before becoming ready ({exit})");
            Err(handle.die(RuntimeError::CandidateLoadError { message, stderr_tail }))
        }
        Err(e) => Err(handle.die(e)),
    }
}

#[cfg(unix)]
pub(crate) fn set_memory_limit(cmd: &mut Command, bytes: u64) {
    use std::os::unix::process::CommandExt;
    // SAFETY: setrlimit is async-signal-safe and touches no parent state.
    unsafe {
        cmd.pre_exec(move || {
            let lim = libc::rlimit { rlim_cur: bytes as libc::rlim_t, rlim_max: bytes as libc::rlim_t };
            if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                return Err(std::io::Error::last_os_error());
            }
            Ok(())
        });
    }
}

#[cfg(not(unix))]
pub(crate) fn set_memory_limit(_cmd: &mut Command, _bytes: u64) {
    log::warn!("memory limits are not supported on this platform");
}

fn describe_exit(status: ExitStatus) -> String {
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        if let Some(sig) = status.signal() {
            return format!("killed by signal {sig}");
        }
    }
    match status.code() {
        Some(c) => format!("exit code {c}"),
        None => "unknown exit".into(),
    }
}

impl HeuristicHandle {
    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn task_binding(&self) -> &str {
        &self.task_binding
    }

    pub fn stderr_tail(&self) -> String {
        self.stderr.get()
    }

    fn send(&mut self, msg: &Request) -> Result<(), RuntimeError> {
        let line = protocol::encode(msg);
        let written = match self.stdin.as_mut() {
            Some(stdin) => stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()),
            None => Err(std::io::ErrorKind::BrokenPipe.into()),
        };
        if written.is_err() {
            let e = self.crashed();
            return Err(self.die(e));
        }
        Ok(())
    }

    fn receive(&mut self, timeout: Duration) -> Result<Reply, RuntimeError> {
        match self.lines.recv_timeout(timeout) {
            Ok(line) => protocol::decode_reply(&line)
                .map_err(|_| RuntimeError::ProtocolViolation { raw: line, stderr_tail: self.stderr_tail() }),
            Err(RecvTimeoutError::Timeout) => Err(RuntimeError::EvalTimeout { stderr_tail: self.stderr_tail() }),
            Err(RecvTimeoutError::Disconnected) => Err(self.crashed()),
        }
    }

    fn crashed(&mut self) -> RuntimeError {
        // give the process a moment to finish exiting after closing stdout
        let deadline = Instant::now() + Duration::from_millis(500);
        let status = loop {
            match self.child.try_wait() {
                Ok(Some(s)) => break Some(s),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => break None,
            }
        };
        // the stderr reader may still be draining
        thread::sleep(Duration::from_millis(20));
        RuntimeError::ChildCrashed {
            exit: status.map_or_else(|| "closed its output".into(), describe_exit),
            stderr_tail: self.stderr_tail(),
        }
    }

    fn die(&mut self, e: RuntimeError) -> RuntimeError {
        let _ = self.child.kill();
        let _ = self.child.wait();
        self.stdin = None;
        self.state = SessionState::Dead(e.to_string());
        e
    }

    /// Evaluates a batch of states given as fact-name lists. Each list is
    /// sorted before sending.
    pub fn eval_states(&mut self, states: &[Vec<String>]) -> Result<Vec<HeuristicValue>, RuntimeError> {
        match &self.state {
            SessionState::Ready => {}
            SessionState::Initializing => return Err(RuntimeError::NotReady("initializing".into())),
            SessionState::Dead(reason) => return Err(RuntimeError::NotReady(reason.clone())),
        }
        let id = self.next_id;
        self.next_id += 1;
        let states = states
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort();
                s
            })
            .collect();
        self.send(&Request::Eval { id, states })?;
        match self.receive(self.limits.eval_timeout) {
            Ok(Reply::Values { id: got, h }) if got == id => Ok(h),
            Ok(other) => {
                let e = RuntimeError::ProtocolViolation { raw: format!("{other:?}"), stderr_tail: self.stderr_tail() };
                Err(self.die(e))
            }
            Err(e) => Err(self.die(e)),
        }
    }

    pub fn eval_state(&mut self, facts: &[String]) -> Result<HeuristicValue, RuntimeError> {
        let mut values = self.eval_batch_checked(std::slice::from_ref(&facts.to_vec()))?;
        Ok(values.pop().expect("one value"))
    }

    /// Like [`eval_states`](Self::eval_states) but also checks that one
    /// value came back per state.
    pub fn eval_batch_checked(&mut self, states: &[Vec<String>]) -> Result<Vec<HeuristicValue>, RuntimeError> {
        let values = self.eval_states(states)?;
        if values.len() != states.len() {
            let e = RuntimeError::ProtocolViolation {
                raw: format!("expected {} values, got {}", states.len(), values.len()),
                stderr_tail: self.stderr_tail(),
            };
            return Err(self.die(e));
        }
        Ok(values)
    }

    /// Asks the child to exit and kills it if it does not within the grace
    /// period. Idempotent.
    pub fn shutdown(&mut self) -> ExitReport {
        if let SessionState::Dead(_) = self.state {
            return ExitReport { forced: false, status: None, already_dead: true };
        }
        if let Some(mut stdin) = self.stdin.take() {
            let _ = stdin.write_all(protocol::encode(&Request::Shutdown).as_bytes());
            let _ = stdin.flush();
        }
        let deadline = Instant::now() + self.limits.grace;
        let mut report = ExitReport { forced: false, status: None, already_dead: false };
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => {
                    report.status = Some(describe_exit(status));
                    break;
                }
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    let _ = self.child.kill();
                    report.forced = true;
                    report.status = self.child.wait().ok().map(describe_exit);
                    break;
                }
            }
        }
        self.state = SessionState::Dead("shut down".into());
        report
    }
}

impl Drop for HeuristicHandle {
    fn drop(&mut self) {
        if !matches!(self.state, SessionState::Dead(_)) {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// A candidate process bound to a grounded task, usable wherever a
/// heuristic is expected.
pub struct ProcessHeuristic<'t> {
    task: &'t GroundTask,
    handle: Mutex<HeuristicHandle>,
    name: String,
}

impl<'t> ProcessHeuristic<'t> {
    pub fn new(task: &'t GroundTask, handle: HeuristicHandle, name: impl Into<String>) -> Self {
        ProcessHeuristic { task, handle: Mutex::new(handle), name: name.into() }
    }

    pub fn shutdown(&self) -> ExitReport {
        self.handle.lock().expect("handle poisoned").shutdown()
    }
}

impl Heuristic<State> for ProcessHeuristic<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &State) -> Result<HeuristicValue, EvalError> {
        let mut v = self.evaluate_batch(std::slice::from_ref(s))?;
        Ok(v.pop().expect("one value"))
    }

    fn evaluate_batch(&self, states: &[State]) -> Result<Vec<HeuristicValue>, EvalError> {
        let facts: Vec<Vec<String>> = states.iter().map(|s| self.task.state_names(s)).collect();
        let mut handle = self.handle.lock().expect("handle poisoned");
        Ok(handle.eval_batch_checked(&facts)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_id_is_code_hash() {
        let a = CandidateSource::new("python", "def h(s, t):\n    return 0\n", Origin::Initial).unwrap();
        let b = CandidateSource::new("python", "def h(s, t):\n    return 0\n", Origin::Repair(2)).unwrap();
        assert_eq!(a.id, b.id);
        assert_eq!(a.id.len(), 64);
        assert_eq!(CandidateSource::new("python", "  \n", Origin::Initial), Err(RuntimeError::EmptyCode));
    }

    #[test]
    fn missing_program_is_spawn_failure() {
        let c = CandidateSource::new("python", "x = 1", Origin::Initial).unwrap();
        let err = spawn(&["/nonexistent/runner".into()], &c, "", "", RuntimeLimits::default()).unwrap_err();
        assert!(matches!(err, RuntimeError::SpawnFailure { .. }));
        assert!(err.is_load_phase());
    }
}
