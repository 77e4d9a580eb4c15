use std::io::{Read, Write};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{run_job, Job, RunOutcome, RunRecord};
use crate::candidate_runtime::set_memory_limit;

/// Extra time a worker gets past its search limit for loading the task and
/// building the heuristic.
const SLACK: Duration = Duration::from_secs(5);

/// Reads one [`Job`] from `input`, runs it and writes the record as one JSON
/// line to `output`.
pub fn worker_main(mut input: impl Read, mut output: impl Write) -> std::io::Result<()> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let job: Job = serde_json::from_str(&text).map_err(std::io::Error::other)?;
    let record = run_job(&job);
    serde_json::to_writer(&mut output, &record)?;
    output.write_all(b"\n")?;
    output.flush()
}

/// Runs `job` in a child process under the job's wall and memory limits.
pub(super) fn supervise(command: &[String], job: &Job) -> RunRecord {
    let crash = |kind: &str| RunRecord::new(job, RunOutcome::Error(kind.into()));
    let Some((program, args)) = command.split_first() else { return crash("crash") };
    let mut cmd = Command::new(program);
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    if let Some(mb) = job.limits.memory_mb {
        set_memory_limit(&mut cmd, mb * 1024 * 1024);
    }
    let start = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => {
            log::error!("cannot start worker {program}: {e}");
            return crash("crash");
        }
    };
    let payload = serde_json::to_vec(job).expect("jobs serialize");
    let mut stdin = child.stdin.take().expect("piped");
    let writer = thread::spawn(move || stdin.write_all(&payload));
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = job.limits.wall_time() + SLACK;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if start.elapsed() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(_) => break None,
        }
    };
    let _ = writer.join();
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    let Some(status) = status else {
        return RunRecord { wall_ms: start.elapsed().as_millis() as u64, ..RunRecord::new(job, RunOutcome::Timeout) };
    };
    if status.success() {
        if let Some(record) = stdout.lines().rev().find(|l| !l.trim().is_empty()).and_then(|l| serde_json::from_str(l).ok()) {
            return record;
        }
    }
    let kind = if job.limits.memory_mb.is_some() && out_of_memory(status, &stderr) { "memory" } else { "crash" };
    log::warn!("worker for {} failed ({status}): {}", job.task.id, stderr.trim_end());
    crash(kind)
}

fn out_of_memory(status: ExitStatus, stderr: &str) -> bool {
    let lower = stderr.to_ascii_lowercase();
    let patterns = ["memory allocation", "out of memory", "memoryerror", "cannot allocate memory", "failed to map segment"];
    if patterns.iter().any(|p| lower.contains(p)) {
        return true;
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        matches!(status.signal(), Some(libc::SIGABRT) | Some(libc::SIGKILL) | Some(libc::SIGSEGV))
    }
    #[cfg(not(unix))]
    {
        let _ = status;
        false
    }
}
