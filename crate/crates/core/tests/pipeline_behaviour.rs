mod common;

use std::process::Command;
use std::sync::Arc;

use common::*;
use roboloop::interpreter::{DroneState, ExecConfig};
use roboloop::llm::{CassetteStore, LlmBackend, RecordingBackend, ReplayBackend, ScriptedBackend, CASSETTE_FORMAT};
use roboloop::pipeline::{run_loop, ConfigFile, LoopStatus, MethodConfig, RoleBackends};
use roboloop::roles::{LlmHandle, ObservationSource};

fn square_scenario(llm: Arc<dyn LlmBackend>) -> MethodConfig {
    let h = LlmHandle::new(llm, "scripted");
    MethodConfig::new(ObservationSource::LlmSim, RoleBackends::shared(h))
}

/// One backend that plays every role of the two-round square correction.
fn square_roles() -> ScriptedBackend {
    let sim = oracle_simulator(DroneState::grounded(), ExecConfig::default());
    ScriptedBackend::responder(move |req| {
        let user = req.last_user();
        if user.contains("Query: \"") {
            sim.complete(req)
        } else if user.contains("Observation:") {
            Ok(if user.contains("3 meters north") { SQUARE_FEEDBACK.to_string() } else { "VERDICT: MATCH".to_string() })
        } else if user.contains("Evaluator feedback") {
            Ok(fenced(SQUARE_FIXED))
        } else {
            Ok(fenced(SQUARE_WRONG_SIDE))
        }
    })
}

#[test]
fn recorded_then_replayed_loop_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let store = Arc::new(CassetteStore::open(&path).unwrap().with_fixed_timestamp(0));
    let recording = Arc::new(RecordingBackend::new(Arc::new(square_roles()), store));
    let live = run_loop(SQUARE_TASK, &square_scenario(recording)).unwrap();
    assert_eq!(live.status, LoopStatus::Accepted);
    assert_eq!(live.iterations_used, 2);

    let text = std::fs::read_to_string(&path).unwrap();
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["format"], CASSETTE_FORMAT);
    assert_eq!(text.lines().count(), 1 + 6);

    let replay = Arc::new(ReplayBackend::new(Arc::new(CassetteStore::load(&path).unwrap())));
    let again = run_loop(SQUARE_TASK, &square_scenario(replay)).unwrap();
    assert_eq!(serde_json::to_string(&live).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn replay_miss_faults_the_loop() {
    let empty = Arc::new(ReplayBackend::new(Arc::new(CassetteStore::in_memory())));
    let r = run_loop(SQUARE_TASK, &square_scenario(empty)).unwrap();
    assert_eq!(r.status, LoopStatus::Faulted);
    assert!(r.error.unwrap().contains("replay miss"));
    assert!(r.iterations.is_empty());
}

#[test]
fn oracle_methods_never_call_the_simulator() {
    let sim = Arc::new(ScriptedBackend::queue(Vec::<String>::new()));
    for source in [ObservationSource::OracleSemantic, ObservationSource::OracleNumerical, ObservationSource::None] {
        let cfg = config(source, queue(&[&fenced(SQUARE_FIXED)]), LlmHandle::new(sim.clone(), "m"), queue(&["VERDICT: MATCH"]));
        let r = run_loop(SQUARE_TASK, &cfg).unwrap();
        assert_eq!(r.status, LoopStatus::Accepted, "{source}");
    }
    assert_eq!(sim.call_count(), 0);
}

fn rounds_with_window(window: usize) -> Vec<String> {
    let gen = handle(ScriptedBackend::constant(fenced("aw.takeoff()")));
    let eval = queue(&[
        "VERDICT: MISMATCH\n- Action 1: first complaint.",
        "VERDICT: MISMATCH\n- Action 1: second complaint.",
        "VERDICT: MISMATCH\n- Action 1: third complaint.",
    ]);
    let mut cfg = config(ObservationSource::OracleSemantic, gen, queue(&[]), eval).with_max_iterations(3);
    cfg.history_window = window;
    let r = run_loop("Fly north.", &cfg).unwrap();
    assert_eq!(r.status, LoopStatus::Exhausted);
    r.iterations.into_iter().map(|it| it.generator_prompt).collect()
}

#[test]
fn history_window_limits_feedback() {
    let narrow = rounds_with_window(1);
    assert!(!narrow[0].contains("complaint"));
    assert!(narrow[2].contains("second complaint") && !narrow[2].contains("first complaint"));
    let wide = rounds_with_window(2);
    assert!(wide[2].contains("first complaint") && wide[2].contains("second complaint"));
    assert!(wide.iter().all(|p| p.starts_with(if p.contains("complaint") { "Task: Fly north." } else { "Write the drone" })));
}

#[test]
fn malformed_verdict_counts_as_mismatch() {
    let gen = queue(&[&fenced("aw.takeoff()"), &fenced("aw.takeoff()")]);
    let eval = queue(&["I think it is fine?", "VERDICT: MATCH"]);
    let r = run_loop("Take off.", &config(ObservationSource::OracleSemantic, gen, queue(&[]), eval)).unwrap();
    assert_eq!(r.iterations_used, 2);
    assert!(!r.iterations[0].verdict.is_match);
    assert!(r.iterations[1].generator_prompt.contains("I think it is fine?"));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "method = \"ours\"\nmax_iteration = 4\n").unwrap();
    assert!(ConfigFile::load(&path).is_err());
    std::fs::write(&path, "method = \"telepathy\"\n").unwrap();
    assert!(ConfigFile::load(&path).is_err());
}

fn cli(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_roboloop")).args(args).current_dir(data_dir()).output().unwrap();
    (out.status.success(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_oracle_and_dataset() {
    let (ok, out) = cli(&["oracle", "--code", "golden/square.py"]);
    assert!(ok);
    assert!(out.starts_with("[[0.0,0.0,-2.5,0.0],[0.0,0.0,-5.0,0.0],[0.0,0.0,0.0,90.0],[5.0,0.0,0.0,0.0]"));
    let (ok, out) = cli(&["dataset", "validate", "tasks/tasks.jsonl"]);
    assert!(ok && out.contains("20 tasks OK"), "{out}");
    let (ok, out) = cli(&["run", "--task-file", "tasks/tasks.jsonl", "--task-id", "t01", "--config", "replay.toml"]);
    assert!(ok && out.starts_with("t01\taccepted"), "{out}");
    let (ok, _) = cli(&["run", "--task-file", "tasks/tasks.jsonl", "--task-id", "nope", "--config", "replay.toml"]);
    assert!(!ok);
}

#[test]
fn shipped_cassette_covers_the_shipped_config() {
    let cfg = ConfigFile::load(data_dir().join("replay.toml")).unwrap();
    let text = std::fs::read_to_string(cfg.cassette.as_ref().unwrap()).unwrap();
    assert!(text.starts_with(r#"{"format":"roboloop-cassette","version":1}"#));
    let ds = dataset();
    let method = cfg.method_config(cfg.backend().unwrap()).unwrap();
    for task in &ds.tasks {
        let r = roboloop::pipeline::run_task(task, &method).unwrap();
        assert_ne!(r.status, LoopStatus::Faulted, "{}: {:?}", task.id, r.error);
    }
}
