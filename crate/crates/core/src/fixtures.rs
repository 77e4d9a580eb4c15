//! The shipped test corpus, indexed by `fixtures/manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::{table_heuristic, HeuristicError, TableHeuristic};
use crate::pddl::{self, GroundTask, PddlError};
use crate::repair::{FeedbackMode, RepairConfig, TaskText};
use crate::state_space::{ExplicitGraph, NodeId, StateSpaceError};

/// `$DHSYNTH_FIXTURES`, or the directory shipped with this crate.
pub fn fixtures_dir() -> PathBuf {
    std::env::var_os("DHSYNTH_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Graph,
    Pddl,
    CandidateScript,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureFiles {
    pub graph: Option<PathBuf>,
    pub domain: Option<PathBuf>,
    pub task: Option<PathBuf>,
    pub script: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub direct: bool,
    pub dda: bool,
}

/// Documented ground truth; `source` says how it was established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub source: String,
    pub solvable: bool,
    #[serde(default)]
    pub reachable_states: Option<usize>,
    /// Whether some reachable non-goal state has no path to a goal.
    #[serde(default)]
    pub dead_ends: Option<bool>,
    /// Per heuristic name. Graphs use `table`; PDDL tasks use `table` for
    /// the perfect heuristic.
    #[serde(default)]
    pub verdicts: BTreeMap<String, PropertyVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub kind: FixtureKind,
    pub description: String,
    pub files: FixtureFiles,
    #[serde(default)]
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub fixtures: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, FixtureError> {
        let path = dir.join("manifest.json");
        let text = read(&path)?;
        serde_json::from_str(&text).map_err(|e| FixtureError::Manifest(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.fixtures.iter().find(|f| f.id == id)
    }

    pub fn of_kind(&self, kind: FixtureKind) -> impl Iterator<Item = &ManifestEntry> {
        self.fixtures.iter().filter(move |f| f.kind == kind)
    }
}

/// A scripted synthesis run: training tasks plus canned responses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub domain: PathBuf,
    pub tasks: Vec<PathBuf>,
    #[serde(default)]
    pub feedback_mode: FeedbackMode,
    #[serde(default)]
    pub coverage_max_expansions: Option<u64>,
    pub max_iterations: u32,
    pub responses: Vec<String>,
}

#[derive(Debug)]
pub enum FixtureData {
    Graph { graph: ExplicitGraph, table: TableHeuristic<NodeId> },
    Pddl { domain_text: String, task_text: String, task: GroundTask },
    Script { config: RepairConfig, responses: Vec<String> },
}

#[derive(Debug)]
pub struct Fixture {
    pub entry: ManifestEntry,
    pub data: FixtureData,
}

impl Fixture {
    pub fn graph(&self) -> Option<(&ExplicitGraph, &TableHeuristic<NodeId>)> {
        match &self.data {
            FixtureData::Graph { graph, table } => Some((graph, table)),
            _ => None,
        }
    }

    pub fn task(&self) -> Option<&GroundTask> {
        match &self.data {
            FixtureData::Pddl { task, .. } => Some(task),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed manifest or script: {0}")]
    Manifest(String),
    #[error("fixture {id}: {source}")]
    Pddl { id: String, source: PddlError },
    #[error("fixture {id}: {source}")]
    Graph { id: String, source: StateSpaceError },
    #[error("fixture {id}: {source}")]
    Heuristic { id: String, source: HeuristicError },
}

fn read(path: &Path) -> Result<String, FixtureError> {
    fs::read_to_string(path).map_err(|source| FixtureError::Io { path: path.to_path_buf(), source })
}

fn required<'a>(entry: &ManifestEntry, file: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf, FixtureError> {
    file.as_ref().ok_or_else(|| FixtureError::Manifest(format!("fixture {} lists no {what} file", entry.id)))
}

/// Loads fixture `id` from [`fixtures_dir`].
pub fn load_fixture(id: &str) -> Result<Fixture, FixtureError> {
    load_fixture_from(&fixtures_dir(), id)
}

pub fn load_fixture_from(dir: &Path, id: &str) -> Result<Fixture, FixtureError> {
    let manifest = Manifest::load(dir)?;
    let entry = manifest.get(id).cloned().ok_or_else(|| FixtureError::UnknownFixture(id.to_string()))?;
    let data = match entry.kind {
        FixtureKind::Graph => {
            let path = dir.join(required(&entry, &entry.files.graph, "graph")?);
            let graph = ExplicitGraph::from_json(&read(&path)?).map_err(|source| FixtureError::Graph { id: id.into(), source })?;
            let table = table_heuristic(&graph).map_err(|source| FixtureError::Heuristic { id: id.into(), source })?;
            FixtureData::Graph { graph, table }
        }
        FixtureKind::Pddl => {
            let domain_text = read(&dir.join(required(&entry, &entry.files.domain, "domain")?))?;
            let task_text = read(&dir.join(required(&entry, &entry.files.task, "task")?))?;
            let task = pddl::load(&domain_text, &task_text).map_err(|source| FixtureError::Pddl { id: id.into(), source })?;
            FixtureData::Pddl { domain_text, task_text, task }
        }
        FixtureKind::CandidateScript => {
            let path = dir.join(required(&entry, &entry.files.script, "script")?);
            let (config, responses) = load_script(&path)?;
            FixtureData::Script { config, responses }
        }
    };
    Ok(Fixture { entry, data })
}

/// Reads a script file; task paths are relative to it.
pub fn load_script(path: &Path) -> Result<(RepairConfig, Vec<String>), FixtureError> {
    let script: Script =
        serde_json::from_str(&read(path)?).map_err(|e| FixtureError::Manifest(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let domain_text = read(&base.join(&script.domain))?;
    let mut tasks = Vec::new();
    for t in &script.tasks {
        let p = base.join(t);
        let id = format!(
            "{}/{}",
            p.parent().and_then(Path::file_name).unwrap_or_default().to_string_lossy(),
            p.file_stem().unwrap_or_default().to_string_lossy()
        );
        tasks.push(TaskText { id, text: read(&p)? });
    }
    let mut config = RepairConfig::new(domain_text, tasks);
    config.max_iterations = script.max_iterations;
    config.feedback_mode = script.feedback_mode;
    config.coverage_max_expansions = script.coverage_max_expansions;
    Ok((config, script.responses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_space::TransitionSystem;

    #[test]
    fn fig2a_and_fig2b() {
        let a = load_fixture("fig2a").unwrap();
        let (graph, _) = a.graph().unwrap();
        assert_eq!(graph.num_nodes(), 6);
        assert_eq!(a.entry.expected.as_ref().unwrap().verdicts["table"], PropertyVerdict { direct: true, dda: true });
        let b = load_fixture("fig2b").unwrap();
        assert_eq!(b.entry.expected.as_ref().unwrap().verdicts["table"], PropertyVerdict { direct: true, dda: false });
    }

    #[test]
    fn deadend_fixture_has_a_stuck_state() {
        let f = load_fixture("deadend-1").unwrap();
        let task = f.task().unwrap();
        let reachable = crate::state_space::enumerate_reachable(task, 10_000).unwrap();
        assert!(reachable.states.iter().any(|s| !task.is_goal(s) && task.successors(s).is_empty()));
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(load_fixture("nope"), Err(FixtureError::UnknownFixture(_))));
    }

    #[test]
    fn every_entry_loads() {
        let manifest = Manifest::load(&fixtures_dir()).unwrap();
        assert!(manifest.of_kind(FixtureKind::Pddl).count() >= 5);
        for e in &manifest.fixtures {
            load_fixture(&e.id).unwrap_or_else(|err| panic!("{}: {err}", e.id));
        }
    }

    #[test]
    fn scripts_resolve_tasks() {
        let f = load_fixture("script-coverage").unwrap();
        let FixtureData::Script { config, responses } = f.data else { panic!() };
        assert_eq!(config.feedback_mode, FeedbackMode::Coverage);
        assert_eq!(config.training_tasks.len(), 2);
        assert_eq!(responses.len(), 2);
    }
}
