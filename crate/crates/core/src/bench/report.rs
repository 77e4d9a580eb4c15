use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Algorithm, RunRecord};

/// An (algorithm, heuristic) configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConfigKey {
    pub algorithm: Algorithm,
    pub heuristic: String,
}

impl ConfigKey {
    pub fn new(algorithm: Algorithm, heuristic: impl Into<String>) -> Self {
        ConfigKey { algorithm, heuristic: heuristic.into() }
    }

    fn of(r: &RunRecord) -> Self {
        ConfigKey::new(r.algorithm, r.heuristic.clone())
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.algorithm, self.heuristic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanSd { mean: 0.0, sd: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

/// The repetitions of one (task, configuration) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedRecord {
    pub suite: String,
    pub domain: String,
    pub task: String,
    pub algorithm: Algorithm,
    pub heuristic: String,
    pub runs: usize,
    pub solved_runs: usize,
    pub plan_length: Option<usize>,
    pub expansions: MeanSd,
    pub evaluations: MeanSd,
    pub wall_ms: MeanSd,
}

impl AggregatedRecord {
    /// Solved in every repetition.
    pub fn solved(&self) -> bool {
        self.solved_runs == self.runs
    }

    pub fn config(&self) -> ConfigKey {
        ConfigKey::new(self.algorithm, self.heuristic.clone())
    }
}

/// Groups records by (task, configuration), keeping first-seen order.
pub fn aggregate_repetitions(records: &[RunRecord]) -> Vec<AggregatedRecord> {
    let mut order: Vec<(String, String, ConfigKey)> = Vec::new();
    let mut groups: BTreeMap<(String, String, ConfigKey), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.suite.clone(), r.task.clone(), ConfigKey::of(r));
        let group = groups.entry(key.clone()).or_default();
        if group.is_empty() {
            order.push(key);
        }
        group.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let metric = |f: fn(&RunRecord) -> u64| MeanSd::of(&rs.iter().map(|r| f(r) as f64).collect::<Vec<_>>());
            AggregatedRecord {
                suite: key.0.clone(),
                domain: rs[0].domain.clone(),
                task: key.1.clone(),
                algorithm: key.2.algorithm,
                heuristic: key.2.heuristic.clone(),
                runs: rs.len(),
                solved_runs: rs.iter().filter(|r| r.solved()).count(),
                plan_length: rs.iter().find_map(|r| r.plan_length),
                expansions: metric(|r| r.expansions),
                evaluations: metric(|r| r.evaluations),
                wall_ms: metric(|r| r.wall_ms),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    /// Linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Quantiles { min: v[0], q25: q(0.25), median: q(0.5), q75: q(0.75), max: v[v.len() - 1] })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DomainCoverage {
    pub tasks: usize,
    pub solved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub algorithm: Algorithm,
    pub heuristic: String,
    pub tasks: usize,
    pub solved: usize,
    pub domains: BTreeMap<String, DomainCoverage>,
    /// Over solved tasks, using the mean across repetitions.
    pub expansions: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub records: usize,
    pub solved: usize,
    pub configs: Vec<ConfigSummary>,
}

pub fn summarize(suite: &str, records: &[RunRecord]) -> Summary {
    let aggregated = aggregate_repetitions(records);
    let mut by_config: BTreeMap<ConfigKey, Vec<&AggregatedRecord>> = BTreeMap::new();
    for a in &aggregated {
        by_config.entry(a.config()).or_default().push(a);
    }
    let configs: Vec<ConfigSummary> = by_config
        .into_iter()
        .map(|(key, cells)| {
            let mut domains: BTreeMap<String, DomainCoverage> = BTreeMap::new();
            for c in &cells {
                let d = domains.entry(c.domain.clone()).or_default();
                d.tasks += 1;
                d.solved += c.solved() as usize;
            }
            let solved: Vec<f64> = cells.iter().filter(|c| c.solved()).map(|c| c.expansions.mean).collect();
            ConfigSummary {
                algorithm: key.algorithm,
                heuristic: key.heuristic,
                tasks: cells.len(),
                solved: solved.len(),
                domains,
                expansions: Quantiles::of(&solved),
            }
        })
        .collect();
    Summary {
        suite: suite.to_string(),
        records: records.len(),
        solved: configs.iter().map(|c| c.solved).sum(),
        configs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    pub suite: String,
    pub domain: String,
    pub task: String,
    pub a: f64,
    pub b: f64,
}

/// Mean expansions of `a` and `b` on the tasks both solved.
pub fn pairwise_expansions(records: &[RunRecord], a: &ConfigKey, b: &ConfigKey) -> Vec<PairRow> {
    let aggregated = aggregate_repetitions(records);
    let solved_by = |k: &ConfigKey| -> BTreeMap<(String, String), &AggregatedRecord> {
        aggregated
            .iter()
            .filter(|r| r.config() == *k && r.solved())
            .map(|r| ((r.suite.clone(), r.task.clone()), r))
            .collect()
    };
    let (sa, sb) = (solved_by(a), solved_by(b));
    aggregated
        .iter()
        .filter(|r| r.config() == *a)
        .filter_map(|r| {
            let key = (r.suite.clone(), r.task.clone());
            let (ra, rb) = (sa.get(&key)?, sb.get(&key)?);
            Some(PairRow {
                suite: r.suite.clone(),
                domain: r.domain.clone(),
                task: r.task.clone(),
                a: ra.expansions.mean,
                b: rb.expansions.mean,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub records_csv: PathBuf,
    pub summary_json: PathBuf,
    pub long_csv: PathBuf,
    pub aggregated_csv: PathBuf,
    pub pairwise: Vec<PathBuf>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "+-_.".contains(c) { c } else { '_' }).collect()
}

/// Writes into `dir`:
///
/// * `records.csv`: one row per record;
/// * `summary.json`: coverage per configuration and domain, expansion
///   quantiles;
/// * `long.csv`: one row per (record, metric), for plotting;
/// * `aggregated.csv`: mean and standard deviation over repetitions;
/// * `pairwise/A__vs__B.csv` for every pair of configurations.
pub fn write_report(suite: &str, records: &[RunRecord], dir: &Path) -> std::io::Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let records_csv = dir.join("records.csv");
    let mut w = csv::Writer::from_path(&records_csv)?;
    w.write_record(["suite", "task", "algorithm", "heuristic", "outcome", "plan_length", "expansions", "evaluations", "wall_ms"])?;
    for r in records {
        w.write_record([
            r.suite.clone(),
            r.task.clone(),
            r.algorithm.to_string(),
            r.heuristic.clone(),
            r.outcome.to_string(),
            opt(r.plan_length),
            r.expansions.to_string(),
            r.evaluations.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;

    let summary_json = dir.join("summary.json");
    fs::write(&summary_json, serde_json::to_string_pretty(&summarize(suite, records))? + "\n")?;

    let long_csv = dir.join("long.csv");
    let mut w = csv::Writer::from_path(&long_csv)?;
    w.write_record(["suite", "domain", "task", "config", "repetition", "outcome", "metric", "value"])?;
    for r in records {
        let config = ConfigKey::of(r).to_string();
        let metrics = [
            ("expansions", Some(r.expansions)),
            ("evaluations", Some(r.evaluations)),
            ("wall_ms", Some(r.wall_ms)),
            ("plan_length", r.plan_length.map(|p| p as u64)),
        ];
        for (metric, value) in metrics {
            w.write_record([
                r.suite.clone(),
                r.domain.clone(),
                r.task.clone(),
                config.clone(),
                r.repetition.to_string(),
                r.outcome.to_string(),
                metric.to_string(),
                opt(value),
            ])?;
        }
    }
    w.flush()?;

    let aggregated = aggregate_repetitions(records);
    let aggregated_csv = dir.join("aggregated.csv");
    let mut w = csv::Writer::from_path(&aggregated_csv)?;
    w.write_record([
        "suite", "domain", "task", "algorithm", "heuristic", "runs", "solved_runs", "expansions_mean", "expansions_sd",
        "wall_ms_mean", "wall_ms_sd",
    ])?;
    for a in &aggregated {
        w.write_record([
            a.suite.clone(),
            a.domain.clone(),
            a.task.clone(),
            a.algorithm.to_string(),
            a.heuristic.clone(),
            a.runs.to_string(),
            a.solved_runs.to_string(),
            a.expansions.mean.to_string(),
            a.expansions.sd.to_string(),
            a.wall_ms.mean.to_string(),
            a.wall_ms.sd.to_string(),
        ])?;
    }
    w.flush()?;

    let mut configs: Vec<ConfigKey> = aggregated.iter().map(AggregatedRecord::config).collect();
    configs.sort();
    configs.dedup();
    let mut pairwise = Vec::new();
    if configs.len() > 1 {
        fs::create_dir_all(dir.join("pairwise"))?;
    }
    for (i, a) in configs.iter().enumerate() {
        for b in &configs[i + 1..] {
            let path = dir.join("pairwise").join(format!("{}__vs__{}.csv", file_safe(&a.to_string()), file_safe(&b.to_string())));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["suite", "domain", "task", &a.to_string(), &b.to_string()])?;
            for row in pairwise_expansions(records, a, b) {
                w.write_record([row.suite, row.domain, row.task, row.a.to_string(), row.b.to_string()])?;
            }
            w.flush()?;
            pairwise.push(path);
        }
    }
    Ok(ReportFiles { records_csv, summary_json, long_csv, aggregated_csv, pairwise })
}

#[cfg(test)]
mod tests {
    use super::super::RunOutcome;
    use super::*;

    fn rec(task: &str, heuristic: &str, outcome: RunOutcome, expansions: u64) -> RunRecord {
        RunRecord {
            suite: "s".into(),
            domain: "d".into(),
            task: task.into(),
            algorithm: Algorithm::Gbfs,
            heuristic: heuristic.into(),
            repetition: 0,
            plan_length: (outcome == RunOutcome::Solved).then_some(2),
            outcome,
            expansions,
            evaluations: expansions,
            wall_ms: 1,
        }
    }

    #[test]
    fn three_records_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            rec("t1", "ff", RunOutcome::Solved, 5),
            rec("t2", "ff", RunOutcome::Timeout, 9),
            rec("t3", "ff", RunOutcome::Error("memory".into()), 0),
        ];
        let files = write_report("s", &records, dir.path()).unwrap();
        let text = fs::read_to_string(&files.records_csv).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "suite,task,algorithm,heuristic,outcome,plan_length,expansions,evaluations,wall_ms");
        assert_eq!(lines[1], "s,t1,gbfs,ff,solved,2,5,5,1");
        assert_eq!(lines[2], "s,t2,gbfs,ff,timeout,,9,9,1");
        assert!(lines[3].contains("error(memory)"));
        assert!(files.pairwise.is_empty());
    }

    #[test]
    fn empty_records() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_report("s", &[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(&files.records_csv).unwrap().lines().count(), 1);
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files.summary_json).unwrap()).unwrap();
        assert_eq!(summary["solved"], 0);
        assert_eq!(summary["configs"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn pairwise_uses_tasks_solved_by_both() {
        let records = vec![
            rec("t1", "ff", RunOutcome::Solved, 5),
            rec("t1", "blind", RunOutcome::Solved, 50),
            rec("t2", "ff", RunOutcome::Solved, 7),
            rec("t2", "blind", RunOutcome::Timeout, 99),
            rec("t3", "ff", RunOutcome::Stuck, 1),
            rec("t3", "blind", RunOutcome::Solved, 30),
        ];
        let rows = pairwise_expansions(&records, &ConfigKey::new(Algorithm::Gbfs, "ff"), &ConfigKey::new(Algorithm::Gbfs, "blind"));
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].task.as_str(), rows[0].a, rows[0].b), ("t1", 5.0, 50.0));
        let dir = tempfile::tempdir().unwrap();
        let files = write_report("s", &records, dir.path()).unwrap();
        assert_eq!(files.pairwise.len(), 1);
        assert_eq!(fs::read_to_string(&files.pairwise[0]).unwrap().lines().count(), 2);
    }

    #[test]
    fn summary_coverage_and_quantiles() {
        let records = vec![
            rec("t1", "ff", RunOutcome::Solved, 1),
            rec("t2", "ff", RunOutcome::Solved, 3),
            rec("t3", "ff", RunOutcome::Solved, 5),
            rec("t4", "ff", RunOutcome::Timeout, 0),
        ];
        let s = summarize("s", &records);
        let c = &s.configs[0];
        assert_eq!((c.tasks, c.solved), (4, 3));
        assert_eq!(c.domains["d"], DomainCoverage { tasks: 4, solved: 3 });
        let q = c.expansions.unwrap();
        assert_eq!((q.min, q.q25, q.median, q.q75, q.max), (1.0, 2.0, 3.0, 4.0, 5.0));
    }

    #[test]
    fn repetitions_report_mean_and_sample_sd() {
        let mut records = vec![rec("t", "ff", RunOutcome::Solved, 1), rec("t", "ff", RunOutcome::Solved, 1), rec("t", "ff", RunOutcome::Solved, 5)];
        for (i, r) in records.iter_mut().enumerate() {
            r.repetition = i as u32;
        }
        let a = aggregate_repetitions(&records);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].runs, 3);
        assert!((a[0].expansions.mean - 7.0 / 3.0).abs() < 1e-9);
        assert!((a[0].expansions.sd - 2.3094).abs() < 1e-4);
    }
}
