use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interpreter::{run_source, DroneState, ExecConfig, Tolerance, Transition};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Line { path: String, line: usize, message: String },
    #[error("manifest {path}: {message}")]
    Manifest { path: String, message: String },
    #[error("task {id}: {message}")]
    Invalid { id: String, message: String },
}

/// One benchmark task with its interpreter-authored ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub description: String,
    pub ground_truth: Vec<Transition>,
    pub complexity: String,
    pub h_takeoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub label: String,
    pub min_actions: usize,
    pub max_actions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub provenance: String,
    pub buckets: Vec<Bucket>,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Directory (relative to the manifest) holding `<id>.py` reference programs.
    #[serde(default)]
    pub references: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn bucket_for(&self, actions: usize) -> Option<&Bucket> {
        self.buckets.iter().find(|b| (b.min_actions..=b.max_actions).contains(&actions))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub tasks: Vec<Task>,
    pub manifest: DatasetManifest,
    /// Directory that holds the task file and manifest.
    pub root: PathBuf,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn load_tasks(path: impl AsRef<Path>) -> Result<Vec<Task>, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    parse_tasks(&text, &path.display().to_string())
}

pub fn parse_tasks(text: &str, origin: &str) -> Result<Vec<Task>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DatasetError::Line { path: origin.to_string(), line: i + 1, message: e.to_string() })
        })
        .collect()
}

pub fn write_tasks(tasks: &[Task]) -> String {
    tasks.iter().map(|t| serde_json::to_string(t).expect("task serializes") + "\n").collect()
}

impl Dataset {
    /// Load a task file and the `manifest.json` beside it.
    pub fn load(tasks_path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let tasks_path = tasks_path.as_ref();
        let root = tasks_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let manifest_path = root.join(MANIFEST_FILE);
        let mtext = fs::read_to_string(&manifest_path)
            .map_err(|source| DatasetError::Io { path: manifest_path.display().to_string(), source })?;
        let manifest: DatasetManifest = serde_json::from_str(&mtext)
            .map_err(|e| DatasetError::Manifest { path: manifest_path.display().to_string(), message: e.to_string() })?;
        Ok(Self { tasks: load_tasks(tasks_path)?, manifest, root })
    }

    pub fn reference_path(&self, id: &str) -> Option<PathBuf> {
        self.manifest.references.as_ref().map(|d| self.root.join(d).join(format!("{id}.py")))
    }

    pub fn reference_code(&self, id: &str) -> Option<String> {
        fs::read_to_string(self.reference_path(id)?).ok()
    }

    /// Check every task invariant; returns one message per problem.
    pub fn validate(&self) -> Vec<DatasetError> {
        let mut problems = Vec::new();
        let mut seen = BTreeSet::new();
        let bad = |id: &str, message: String| DatasetError::Invalid { id: id.to_string(), message };
        for task in &self.tasks {
            if !seen.insert(task.id.clone()) {
                problems.push(bad(&task.id, "duplicate id".into()));
            }
            if task.description.trim().is_empty() {
                problems.push(bad(&task.id, "empty description".into()));
            }
            if task.ground_truth.is_empty() {
                problems.push(bad(&task.id, "empty ground truth".into()));
            }
            for (i, t) in task.ground_truth.iter().enumerate() {
                if !t.as_array().iter().all(|v| v.is_finite()) || !(t.dtheta > -180.0 && t.dtheta <= 180.0) {
                    problems.push(bad(&task.id, format!("ground truth entry {i} is not a valid transition")));
                }
            }
            if !(task.h_takeoff.is_finite() && task.h_takeoff > 0.0) {
                problems.push(bad(&task.id, "h_takeoff must be positive".into()));
            }
            match self.manifest.bucket_for(task.ground_truth.len()) {
                Some(b) if b.label == task.complexity => {}
                Some(b) => problems.push(bad(
                    &task.id,
                    format!("complexity {:?} but {} actions fall in bucket {:?}", task.complexity, task.ground_truth.len(), b.label),
                )),
                None => problems.push(bad(&task.id, format!("{} actions fall in no bucket", task.ground_truth.len()))),
            }
            if let Some(path) = self.reference_path(&task.id) {
                match fs::read_to_string(&path) {
                    Err(e) => problems.push(bad(&task.id, format!("reference {}: {e}", path.display()))),
                    Ok(code) => {
                        let exec = ExecConfig::default().with_takeoff_altitude(task.h_takeoff);
                        match run_source(&code, DroneState::grounded(), &exec) {
                            Err(e) => problems.push(bad(&task.id, format!("reference does not parse: {e}"))),
                            Ok(trace) if !trace.faults.is_empty() => {
                                problems.push(bad(&task.id, format!("reference faults: {}", trace.faults[0])))
                            }
                            Ok(trace) if trace.transitions != task.ground_truth => {
                                problems.push(bad(&task.id, "reference program does not reproduce the ground truth".into()))
                            }
                            Ok(_) => {}
                        }
                    }
                }
            }
        }
        problems
    }
}

pub const SOURCES_FILE: &str = "sources.json";
pub const TASKS_FILE: &str = "tasks.jsonl";

#[derive(Debug, Clone, Deserialize)]
struct TaskSource {
    id: String,
    description: String,
    #[serde(default)]
    h_takeoff: Option<f64>,
}

/// Derive tasks from `sources.json` and the manifest's reference programs in `dir`.
///
/// Ground truth is whatever the interpreter produces for each reference; a
/// reference that fails to parse or faults is an error.
pub fn build_tasks(dir: impl AsRef<Path>) -> Result<Vec<Task>, DatasetError> {
    let dir = dir.as_ref();
    let read = |p: PathBuf| fs::read_to_string(&p).map_err(|source| DatasetError::Io { path: p.display().to_string(), source });
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: DatasetManifest = serde_json::from_str(&read(manifest_path.clone())?)
        .map_err(|e| DatasetError::Manifest { path: manifest_path.display().to_string(), message: e.to_string() })?;
    let sources_path = dir.join(SOURCES_FILE);
    let sources: Vec<TaskSource> = serde_json::from_str(&read(sources_path.clone())?)
        .map_err(|e| DatasetError::Manifest { path: sources_path.display().to_string(), message: e.to_string() })?;
    let refs = dir.join(manifest.references.clone().unwrap_or_else(|| PathBuf::from("references")));
    let default_h = ExecConfig::default().takeoff_altitude;
    sources
        .into_iter()
        .map(|src| {
            let bad = |message: String| DatasetError::Invalid { id: src.id.clone(), message };
            let h = src.h_takeoff.unwrap_or(default_h);
            let code = read(refs.join(format!("{}.py", src.id)))?;
            let trace = run_source(&code, DroneState::grounded(), &ExecConfig::default().with_takeoff_altitude(h))
                .map_err(|e| bad(format!("reference does not parse: {e}")))?;
            if let Some(f) = trace.faults.first() {
                return Err(bad(format!("reference faults: {f}")));
            }
            let n = trace.transitions.len();
            let bucket = manifest.bucket_for(n).ok_or_else(|| bad(format!("{n} actions fall in no bucket")))?;
            Ok(Task {
                id: src.id.clone(),
                description: src.description.clone(),
                ground_truth: trace.transitions,
                complexity: bucket.label.clone(),
                h_takeoff: h,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_line_format() {
        let line = r#"{"id":"t1","description":"Take off.","ground_truth":[[0,0,-2.5,0]],"complexity":"6-8","h_takeoff":2.5}"#;
        let tasks = parse_tasks(line, "mem").unwrap();
        assert_eq!(tasks[0].ground_truth, vec![Transition::new(0.0, 0.0, -2.5, 0.0)]);
        assert_eq!(write_tasks(&tasks).trim_end(), r#"{"id":"t1","description":"Take off.","ground_truth":[[0.0,0.0,-2.5,0.0]],"complexity":"6-8","h_takeoff":2.5}"#);
        assert!(matches!(parse_tasks("{}", "mem"), Err(DatasetError::Line { line: 1, .. })));
    }

    #[test]
    fn validation_flags_bucket_mismatch() {
        let manifest = DatasetManifest {
            name: "t".into(),
            provenance: "test".into(),
            buckets: vec![Bucket { label: "1-2".into(), min_actions: 1, max_actions: 2 }],
            tolerance: Tolerance::default(),
            references: None,
        };
        let task = |id: &str, n: usize, c: &str| Task {
            id: id.into(),
            description: "d".into(),
            ground_truth: vec![Transition::default(); n],
            complexity: c.into(),
            h_takeoff: 2.5,
        };
        let ds = Dataset { tasks: vec![task("a", 1, "1-2"), task("b", 3, "1-2"), task("a", 2, "x")], manifest, root: ".".into() };
        let problems = ds.validate();
        assert_eq!(problems.len(), 3, "{problems:?}");
    }
}
