//! A deterministic stand-in for all three LLM roles, driven by the interpreter.
//!
//! It answers generator, simulator and evaluator prompts for a known task set,
//! so the whole loop can run (and a replay cassette can be built) without a
//! model. On designated tasks the first generated program is a mutant of the
//! reference, which makes the loop go through one correction round.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;

use super::dataset::Dataset;
use crate::interpreter::{
    format_number, mutate, parse, parse_narration, render_faults, render_semantic, run_source, to_source, yaw_delta,
    DroneState, ExecConfig, Tolerance, Transition,
};
use crate::llm::{CompletionRequest, LlmError, ScriptedBackend};
use crate::prompts::TRANSITIONS_MARKER;
use crate::roles::{extract_code, CodeExtraction};

#[derive(Debug, Clone)]
struct Entry {
    first_attempt: String,
    reference: String,
    ground_truth: Vec<Transition>,
}

/// Interpreter-backed replies for a fixed set of tasks.
#[derive(Debug, Clone)]
pub struct ReferenceResponder {
    entries: HashMap<String, Entry>,
    exec: ExecConfig,
    tolerance: Tolerance,
}

/// Tasks at these positions (index mod 3 == 1) start from a mutated program.
pub fn starts_with_mutant(index: usize) -> bool {
    index % 3 == 1
}

impl ReferenceResponder {
    /// Requires a reference program for every task.
    pub fn from_dataset(dataset: &Dataset) -> Result<Self, String> {
        let mut entries = HashMap::new();
        let mut exec = ExecConfig::default();
        for (i, task) in dataset.tasks.iter().enumerate() {
            let reference = dataset.reference_code(&task.id).ok_or_else(|| format!("task {}: no reference program", task.id))?;
            let reference = reference.trim_end().to_string();
            exec = exec.with_takeoff_altitude(task.h_takeoff);
            let first_attempt = if starts_with_mutant(i) {
                let program = parse(&reference).map_err(|e| format!("task {}: {e}", task.id))?;
                let mutant = crate::interpreter::mutate_with(&program, i as u64, DroneState::grounded(), &exec)
                    .map_err(|e| format!("task {}: {e}", task.id))?;
                to_source(&mutant).trim_end().to_string()
            } else {
                reference.clone()
            };
            entries.insert(task.description.trim().to_string(), Entry { first_attempt, reference, ground_truth: task.ground_truth.clone() });
        }
        Ok(Self { entries, exec, tolerance: dataset.manifest.tolerance })
    }

    pub fn into_backend(self) -> ScriptedBackend {
        ScriptedBackend::responder(move |req| self.respond(req))
    }

    pub fn respond(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        let user = request.last_user();
        let decline = |what: &str| LlmError::InvalidRequest(format!("reference responder cannot answer {what}"));
        if let Some(task) = user.strip_prefix("Write the drone control code for the following task.\nTask: ") {
            let e = self.entries.get(task.trim()).ok_or_else(|| decline("an unknown task"))?;
            return Ok(fence(&e.first_attempt));
        }
        if let Some(code) = query_code(user) {
            return Ok(self.simulate(&code));
        }
        let Some((task, body)) = split_task(user) else {
            return Err(decline("this prompt"));
        };
        let entry = self.entries.get(task).ok_or_else(|| decline("an unknown task"))?;
        if body.contains("Previous code:\n") {
            return Ok(fence(&entry.reference));
        }
        if let Some(obs) = body.strip_prefix("Observation:\n") {
            return Ok(self.judge(read_observation(obs), &entry.ground_truth));
        }
        if let Some(code) = body.strip_prefix("Code:\n") {
            let code = extract_code(code, CodeExtraction::LastBlock).unwrap_or_default();
            let predicted = match run_source(&code, DroneState::grounded(), &self.exec) {
                Ok(trace) if trace.faults.is_empty() => Reading::Transitions(trace.transitions),
                Ok(trace) => Reading::Problem(render_faults(&trace)),
                Err(e) => Reading::Problem(format!("The code could not be parsed: {e}")),
            };
            return Ok(self.judge(predicted, &entry.ground_truth));
        }
        Err(decline("this prompt"))
    }

    fn simulate(&self, code: &str) -> String {
        match run_source(code, DroneState::grounded(), &self.exec) {
            Ok(trace) => {
                let mut prose = render_semantic(&trace);
                if !trace.faults.is_empty() {
                    prose = format!("{prose}\n\n{}", render_faults(&trace));
                }
                let block = serde_json::to_string(&trace.transitions).expect("transitions serialize");
                format!("{prose}\n{TRANSITIONS_MARKER} {block}")
            }
            Err(e) => format!("The code cannot be simulated: {e}\n{TRANSITIONS_MARKER} []"),
        }
    }

    fn judge(&self, reading: Reading, gt: &[Transition]) -> String {
        let predicted = match reading {
            Reading::Transitions(t) => t,
            Reading::Problem(p) => return format!("VERDICT: MISMATCH\n{p}"),
        };
        let first_bad = predicted.iter().zip(gt).position(|(p, g)| !p.matches(g, &self.tolerance));
        let line = match first_bad {
            Some(i) => format!(
                "- Action {}: the drone changes its pose by {}, but the task requires {}.",
                i + 1,
                show(&predicted[i]),
                show(&gt[i])
            ),
            None if predicted.len() > gt.len() => format!(
                "- Action {}: the drone changes its pose by {}, but the task requires no further action.",
                gt.len() + 1,
                show(&predicted[gt.len()])
            ),
            None if predicted.len() < gt.len() => format!(
                "- Action {}: the drone stops, but the task requires {}.",
                predicted.len() + 1,
                show(&gt[predicted.len()])
            ),
            None => return "VERDICT: MATCH".to_string(),
        };
        format!("VERDICT: MISMATCH\n{line}")
    }
}

enum Reading {
    Transitions(Vec<Transition>),
    Problem(String),
}

fn fence(code: &str) -> String {
    format!("```python\n{code}\n```")
}

fn show(t: &Transition) -> String {
    let parts: Vec<String> = t.as_array().iter().map(|v| format_number(*v)).collect();
    format!("[{}]", parts.join(", "))
}

fn query_code(user: &str) -> Option<String> {
    let start = user.rfind("Query: \"\n")? + "Query: \"\n".len();
    let end = user.rfind("\n\"\n\nAnswer:")?;
    (end >= start).then(|| user[start..end].to_string())
}

fn split_task(user: &str) -> Option<(&str, &str)> {
    let rest = user.strip_prefix("Task: ")?;
    let (task, body) = rest.split_once("\n\n")?;
    Some((task.trim(), body))
}

static STATE_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\((-?[0-9.]+), (-?[0-9.]+), (-?[0-9.]+), (-?[0-9.]+)\)$").unwrap());

/// Recover deltas from a semantic narration or from numerical state lines.
fn read_observation(text: &str) -> Reading {
    let text = text.trim();
    if text.starts_with("The code could not be parsed") || text.contains("Execution faults:") {
        return Reading::Problem(text.to_string());
    }
    if let Some(t) = parse_narration(text) {
        return Reading::Transitions(t);
    }
    let states: Option<Vec<[f64; 4]>> = text
        .lines()
        .map(|l| {
            let c = STATE_LINE.captures(l.trim())?;
            Some([c[1].parse().ok()?, c[2].parse().ok()?, c[3].parse().ok()?, c[4].parse().ok()?])
        })
        .collect();
    match states {
        Some(s) if !s.is_empty() => Reading::Transitions(
            s.windows(2)
                .map(|w| Transition::new(w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2], yaw_delta(w[0][3], w[1][3])))
                .collect(),
        ),
        _ => Reading::Problem("The observation could not be interpreted.".into()),
    }
}

/// Printed source of `mutate(code, seed)`.
pub fn mutant_source(code: &str, seed: u64) -> Result<String, String> {
    let program = parse(code).map_err(|e| e.to_string())?;
    mutate(&program, seed).map(|p| to_source(&p)).map_err(|e| e.to_string())
}
