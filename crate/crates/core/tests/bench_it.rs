mod common;

use std::collections::BTreeSet;
use std::fs;

use common::*;
use dhsynth::bench::{run_suite, write_report, Algorithm, Executor, HeuristicSpec, RunOutcome, RunRecord, RunSpec};
use dhsynth::fixtures::fixtures_dir;
use dhsynth::heuristics::perfect_table;
use dhsynth::state_space::TransitionSystem;

fn fixture_suite() -> RunSpec {
    RunSpec::load(&fixtures_dir().join("suites/fixtures.json")).unwrap()
}

fn with(spec: &RunSpec, heuristics: &[&str], algorithms: &[Algorithm]) -> RunSpec {
    let mut s = spec.clone();
    s.heuristics = heuristics.iter().map(|h| HeuristicSpec::Builtin(h.to_string())).collect();
    s.algorithms = algorithms.to_vec();
    s
}

fn solved(records: &[RunRecord]) -> BTreeSet<(String, String, String)> {
    records.iter().filter(|r| r.solved()).map(|r| (r.task.clone(), r.algorithm.to_string(), r.heuristic.clone())).collect()
}

#[test]
fn blind_gbfs_solves_every_solvable_fixture() {
    let spec = with(&fixture_suite(), &["blind"], &[Algorithm::Gbfs]);
    let report = run_suite(&spec, &Executor::InProcess).unwrap();
    let solvable = manifest()
        .of_kind(dhsynth::fixtures::FixtureKind::Pddl)
        .filter(|e| e.expected.as_ref().is_some_and(|x| x.solvable))
        .count();
    assert_eq!(report.records.len(), 6);
    assert_eq!(report.records.iter().filter(|r| r.solved()).count(), solvable);
}

#[test]
fn solved_set_grows_with_the_expansion_limit() {
    let base = with(&fixture_suite(), &["ff", "goal-count", "blind"], &[Algorithm::Hc, Algorithm::Gbfs]);
    let mut previous = BTreeSet::new();
    for limit in [0, 1, 2, 4, 8, 16, 32, 64, 1024] {
        let mut spec = base.clone();
        spec.limits.max_expansions = Some(limit);
        let report = run_suite(&spec, &Executor::InProcess).unwrap();
        let now = solved(&report.records);
        assert!(previous.is_subset(&now), "limit {limit} lost {:?}", previous.difference(&now).collect::<Vec<_>>());
        for r in report.records.iter().filter(|r| !r.solved()) {
            assert!(r.expansions <= limit, "{r:?}");
        }
        previous = now;
    }
}

#[test]
fn plans_are_never_shorter_than_optimal() {
    let report = run_suite(&fixture_suite(), &Executor::InProcess).unwrap();
    assert_eq!(report.records.len(), 6 * 4 * 2);
    let m = manifest();
    for f in pddl_fixtures() {
        let task_id = m.get(&f.id).unwrap().files.task.as_ref().unwrap().with_extension("").to_string_lossy().into_owned();
        let h_star = perfect_table(&f.task, 100_000).unwrap().get(&f.task.initial()).unwrap().as_integer().unwrap() as usize;
        let runs: Vec<_> = report.records.iter().filter(|r| r.task == task_id && r.solved()).collect();
        assert!(!runs.is_empty(), "{task_id}");
        for r in runs {
            assert!(r.plan_length.unwrap() >= h_star, "{r:?} beats the optimum {h_star}");
        }
    }
    for r in &report.records {
        match &r.outcome {
            RunOutcome::Solved => assert!(r.plan_length.is_some()),
            RunOutcome::Error(e) => panic!("{}: {e}", r.task),
            _ => assert!(r.plan_length.is_none()),
        }
    }
    let table_hc: Vec<_> = report.records.iter().filter(|r| r.algorithm == Algorithm::Hc && r.heuristic == "table").collect();
    assert!(table_hc.iter().all(|r| r.solved() && r.plan_length == Some(r.expansions as usize)));
}

#[test]
fn process_candidate_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let candidate = dir.path().join("ff.py");
    fs::write(&candidate, "# builtin: ff\ndef h(state, task):\n    return 0\n").unwrap();
    let mut spec = with(&fixture_suite(), &["ff"], &[Algorithm::Hc, Algorithm::Gbfs]);
    spec.heuristics.push(HeuristicSpec::Candidate {
        candidate,
        runner: Some(vec![env!("CARGO_BIN_EXE_mock-runner").to_string()]),
        name: Some("ff-process".into()),
    });
    let report = run_suite(&spec, &Executor::InProcess).unwrap();
    let of = |h: &str| -> Vec<_> {
        report
            .records
            .iter()
            .filter(|r| r.heuristic == h)
            .map(|r| (r.task.clone(), r.algorithm, r.outcome.clone(), r.plan_length, r.expansions))
            .collect()
    };
    assert_eq!(of("ff"), of("ff-process"));
}

#[test]
fn report_files_are_complete() {
    let spec = with(&fixture_suite(), &["ff", "blind"], &[Algorithm::Hc, Algorithm::Gbfs]);
    let report = run_suite(&spec, &Executor::InProcess).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_report(&spec.suite, &report.records, dir.path()).unwrap();
    let csv = fs::read_to_string(&files.records_csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "suite,task,algorithm,heuristic,outcome,plan_length,expansions,evaluations,wall_ms");
    assert_eq!(lines.count(), report.records.len());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files.summary_json).unwrap()).unwrap();
    assert_eq!(summary["configs"].as_array().unwrap().len(), 4);
    assert_eq!(files.pairwise.len(), 6);
}
