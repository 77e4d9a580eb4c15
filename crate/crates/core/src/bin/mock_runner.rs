//! A candidate runner that needs no interpreter.
//!
//! It speaks the child side of the candidate protocol and interprets the
//! `# builtin: NAME` directive in the candidate code. Besides the heuristic
//! builtins it understands a few misbehaviours used to test the parent:
//! `load-error`, `crash-on-load`, `slow-handshake`, `hang`, `crash`,
//! `negative`, `garbage`, `ignore-shutdown`.

use std::io::{self, BufRead, Write};
use std::process::exit;
use std::thread::sleep;
use std::time::Duration;

use dhsynth::candidate_runtime::builtin::{builtin_directive, builtin_heuristic};
use dhsynth::candidate_runtime::protocol::{decode_request, encode, Reply, Request};
use dhsynth::pddl;

fn send(out: &mut impl Write, reply: &Reply) {
    out.write_all(encode(reply).as_bytes()).and_then(|_| out.flush()).unwrap_or_else(|_| exit(1));
}

fn forever() -> ! {
    loop {
        sleep(Duration::from_secs(3600));
    }
}

fn main() {
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    let mut lines = stdin.lock().lines();

    let first = lines.next().and_then(Result::ok).unwrap_or_else(|| exit(2));
    let Ok(Request::Init { domain_pddl, task_pddl, code }) = decode_request(&first) else {
        eprintln!("expected init message");
        exit(2);
    };
    let Some(name) = builtin_directive(&code).map(str::to_string) else {
        send(&mut stdout, &Reply::LoadError { message: "candidate does not define h(state, task)".into() });
        exit(1);
    };
    match name.as_str() {
        "load-error" => {
            send(&mut stdout, &Reply::LoadError { message: "SyntaxError: invalid syntax (candidate.py, line 3)".into() });
            exit(1);
        }
        "crash-on-load" => {
            eprintln!("Traceback (most recent call last):\nImportError: No module named 'planner'");
            exit(1);
        }
        "slow-handshake" => sleep(Duration::from_secs(30)),
        _ => {}
    }
    let task = match pddl::load(&domain_pddl, &task_pddl) {
        Ok(t) => t,
        Err(e) => {
            send(&mut stdout, &Reply::LoadError { message: e.to_string() });
            exit(1);
        }
    };
    let behaviour = name.as_str();
    let heuristic = match behaviour {
        "hang" | "crash" | "negative" | "garbage" => builtin_heuristic("goal-count", &task),
        "ignore-shutdown" | "slow-handshake" => builtin_heuristic("goal-count", &task),
        other => builtin_heuristic(other, &task),
    };
    let Some(heuristic) = heuristic else {
        send(&mut stdout, &Reply::LoadError { message: format!("NameError: unknown builtin '{name}'") });
        exit(1);
    };
    send(&mut stdout, &Reply::Ready);

    for line in lines {
        let Ok(line) = line else { exit(1) };
        match decode_request(&line) {
            Ok(Request::Eval { id, states }) => {
                match behaviour {
                    "hang" => forever(),
                    "crash" => {
                        eprintln!("Traceback (most recent call last):\n  File \"candidate.py\", line 7, in h\nZeroDivisionError: division by zero");
                        exit(1);
                    }
                    "negative" => {
                        let h = vec!["-1"; states.len()].join(",");
                        println!("{{\"type\":\"values\",\"id\":{id},\"h\":[{h}]}}");
                        continue;
                    }
                    "garbage" => {
                        println!("debug: evaluating {} states", states.len());
                        continue;
                    }
                    _ => {}
                }
                let mut h = Vec::with_capacity(states.len());
                for facts in states {
                    let state = task.state_from_names(&facts).unwrap_or_else(|e| {
                        eprintln!("bad state: {e}");
                        exit(1)
                    });
                    h.push(heuristic.evaluate(&state).unwrap_or_else(|e| {
                        eprintln!("{e}");
                        exit(1)
                    }));
                }
                send(&mut stdout, &Reply::Values { id, h });
            }
            Ok(Request::Shutdown) => {
                if behaviour == "ignore-shutdown" {
                    forever();
                }
                exit(0);
            }
            _ => {
                eprintln!("unexpected message: {line}");
                exit(2);
            }
        }
    }
}
