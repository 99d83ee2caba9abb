#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use roboloop::evalbench::Dataset;
use roboloop::interpreter::{render_semantic, run_source, DroneState, ExecConfig, Transition};
use roboloop::llm::{CompletionRequest, LlmError, ScriptedBackend};
use roboloop::pipeline::{MethodConfig, RoleBackends};
use roboloop::roles::{LlmHandle, ObservationSource};
use serde::Deserialize;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Debug, Clone, Deserialize)]
struct GoldenRow {
    file: String,
    initial: String,
    h_takeoff: f64,
    transitions: Vec<[f64; 4]>,
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: String,
    pub code: String,
    pub initial: DroneState,
    pub exec: ExecConfig,
    pub expected: Vec<Transition>,
}

pub fn golden() -> Vec<GoldenCase> {
    let dir = data_dir().join("golden");
    let rows: Vec<GoldenRow> = serde_json::from_str(&std::fs::read_to_string(dir.join("expected.json")).unwrap()).unwrap();
    rows.into_iter()
        .map(|r| GoldenCase {
            code: std::fs::read_to_string(dir.join(&r.file)).unwrap(),
            name: r.file.trim_end_matches(".py").to_string(),
            initial: match r.initial.as_str() {
                "grounded" => DroneState::grounded(),
                "hovering" => DroneState::hovering(),
                other => panic!("unknown initial state {other}"),
            },
            exec: ExecConfig::default().with_takeoff_altitude(r.h_takeoff),
            expected: r.transitions.into_iter().map(Transition::from).collect(),
        })
        .collect()
}

pub fn dataset() -> Dataset {
    Dataset::load(data_dir().join("tasks").join("tasks.jsonl")).unwrap()
}

/// The code between the last `Query: "` line and the closing quote of a simulator request.
pub fn query_code(user: &str) -> Option<String> {
    let start = user.rfind("Query: \"\n")? + "Query: \"\n".len();
    let end = user.rfind("\n\"\n\nAnswer:")?;
    Some(user[start..end].to_string())
}

/// An LLM simulator that answers with the interpreter's narration and transition block.
pub fn oracle_simulator(initial: DroneState, exec: ExecConfig) -> ScriptedBackend {
    ScriptedBackend::responder(move |req: &CompletionRequest| {
        let code = query_code(req.last_user()).ok_or_else(|| LlmError::InvalidRequest("not a simulator query".into()))?;
        let trace = run_source(&code, initial, &exec).map_err(|e| LlmError::InvalidRequest(e.to_string()))?;
        Ok(format!("{}\nTRANSITIONS: {}", render_semantic(&trace), serde_json::to_string(&trace.transitions).unwrap()))
    })
}

pub fn handle(backend: ScriptedBackend) -> LlmHandle {
    LlmHandle::new(Arc::new(backend), "scripted")
}

pub fn queue(replies: &[&str]) -> LlmHandle {
    handle(ScriptedBackend::queue(replies.iter().copied()))
}

pub fn config(source: ObservationSource, generator: LlmHandle, simulator: LlmHandle, evaluator: LlmHandle) -> MethodConfig {
    MethodConfig::new(source, RoleBackends { generator, simulator, evaluator })
}

pub fn fenced(code: &str) -> String {
    format!("```python\n{code}\n```")
}

/// First-iteration code of the corrective example: a square with 3 m sides instead of 5 m.
pub const SQUARE_TASK: &str =
    "Take off, climb 5 more meters, then fly a 5-meter square: north, east, south and west, turning 90 degrees clockwise before each side.";

pub const SQUARE_WRONG_SIDE: &str = "aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 5])
aw.set_yaw(90)
p = aw.get_drone_position()
aw.fly_to([p[0] + 3, p[1], p[2]])
aw.set_yaw(aw.get_yaw() + 90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 3, p[2]])
aw.set_yaw(aw.get_yaw() + 90)
p = aw.get_drone_position()
aw.fly_to([p[0] - 3, p[1], p[2]])
aw.set_yaw(aw.get_yaw() + 90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] - 3, p[2]])";

pub const SQUARE_FIXED: &str = "aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 5])
aw.set_yaw(90)
p = aw.get_drone_position()
aw.fly_to([p[0] + 5, p[1], p[2]])
aw.set_yaw(aw.get_yaw() + 90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 5, p[2]])
aw.set_yaw(aw.get_yaw() + 90)
p = aw.get_drone_position()
aw.fly_to([p[0] - 5, p[1], p[2]])
aw.set_yaw(aw.get_yaw() + 90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] - 5, p[2]])";

pub const SQUARE_FEEDBACK: &str = "VERDICT: MISMATCH
- Action 4: the drone flies 3 meters north, but the task requires 5 meters north.
- Action 6: the drone flies 3 meters east, but the task requires 5 meters east.
- Action 8: the drone flies 3 meters south, but the task requires 5 meters south.
- Action 10: the drone flies 3 meters west, but the task requires 5 meters west.";
