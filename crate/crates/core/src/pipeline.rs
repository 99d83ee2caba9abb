//! The generation, simulation and evaluation loop.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interpreter::{execute, parse, DroneState, ExecConfig, Tolerance};
use crate::llm::{CassetteStore, GenerationParams, LiveBackend, LiveConfig, LlmBackend, RecordingBackend, ReplayBackend};
use crate::prompts::{CorrectionRound, GeneratorContext, PromptError, PromptSet};
use crate::roles::{evaluate, generate, simulate_llm, CodeExtraction, LlmHandle, Observation, ObservationSource, RoleError, Verdict};

pub const DEFAULT_MAX_ITERATIONS: usize = 5;

/// Feedback stored when the evaluator reports a mismatch without saying what.
pub const UNSPECIFIED_MISMATCH: &str = "The evaluator reported a mismatch without details.";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error("task description is empty")]
    EmptyTask,
    #[error("code is empty")]
    EmptyCode,
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] crate::llm::LlmError),
}

/// One handle per LLM role; they may share a backend.
#[derive(Debug, Clone)]
pub struct RoleBackends {
    pub generator: LlmHandle,
    pub simulator: LlmHandle,
    pub evaluator: LlmHandle,
}

impl RoleBackends {
    pub fn shared(handle: LlmHandle) -> Self {
        Self { generator: handle.clone(), simulator: handle.clone(), evaluator: handle }
    }
}

#[derive(Debug, Clone)]
pub struct MethodConfig {
    pub simulation_backend: ObservationSource,
    pub max_iterations: usize,
    pub prompts: PromptSet,
    pub llm: RoleBackends,
    pub exec: ExecConfig,
    pub initial_state: DroneState,
    /// How many earlier (code, feedback) rounds the generator sees during correction.
    pub history_window: usize,
    pub extraction: CodeExtraction,
}

impl MethodConfig {
    pub fn new(simulation_backend: ObservationSource, llm: RoleBackends) -> Self {
        Self {
            simulation_backend,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            prompts: PromptSet::default(),
            llm,
            exec: ExecConfig::default(),
            initial_state: DroneState::grounded(),
            history_window: 1,
            extraction: CodeExtraction::default(),
        }
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.max_iterations == 0 {
            return Err(PipelineError::ZeroIterations);
        }
        Ok(())
    }
}

/// Display name used in reports.
pub fn method_label(source: ObservationSource) -> &'static str {
    match source {
        ObservationSource::LlmSim => "Ours",
        ObservationSource::OracleSemantic => "Semantic",
        ObservationSource::OracleNumerical => "Numerical",
        ObservationSource::None => "Direct",
    }
}

/// Accepts report labels, source names and a few aliases.
pub fn parse_method(name: &str) -> Result<ObservationSource, String> {
    match name.trim().to_ascii_lowercase().as_str() {
        "ours" | "llm_sim" | "llm" => Ok(ObservationSource::LlmSim),
        "semantic" | "oracle_semantic" => Ok(ObservationSource::OracleSemantic),
        "numerical" | "oracle_numerical" => Ok(ObservationSource::OracleNumerical),
        "direct" | "none" => Ok(ObservationSource::None),
        other => Err(format!("unknown method {other:?} (expected ours, semantic, numerical or direct)")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopStatus {
    Accepted,
    Exhausted,
    Faulted,
}

impl fmt::Display for LoopStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoopStatus::Accepted => "accepted",
            LoopStatus::Exhausted => "exhausted",
            LoopStatus::Faulted => "faulted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub code: String,
    /// User turn sent to the generator in this round.
    pub generator_prompt: String,
    pub observation: Observation,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopResult {
    pub iterations: Vec<Iteration>,
    pub final_code: String,
    pub status: LoopStatus,
    /// Rounds started, including one cut short by a fault.
    pub iterations_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Produce the observation the evaluator will read.
pub fn observe(code: &str, config: &MethodConfig) -> Result<Observation, RoleError> {
    match config.simulation_backend {
        ObservationSource::LlmSim => simulate_llm(code, &config.prompts.simulator, &config.llm.simulator),
        source @ (ObservationSource::OracleSemantic | ObservationSource::OracleNumerical) => {
            let program = match parse(code) {
                Ok(p) => p,
                Err(e) => return Ok(Observation::parse_failure(&e, source)),
            };
            let trace = execute(&program, config.initial_state, &config.exec);
            Ok(if source == ObservationSource::OracleSemantic {
                Observation::oracle_semantic(&trace)
            } else {
                Observation::oracle_numerical(&trace)
            })
        }
        ObservationSource::None => Ok(Observation::direct(code)),
    }
}

fn context_for(task: &str, iterations: &[Iteration], window: usize) -> GeneratorContext {
    if iterations.is_empty() {
        return GeneratorContext::initial(task);
    }
    let start = iterations.len().saturating_sub(window.max(1));
    GeneratorContext::Correction {
        task: task.to_string(),
        history: iterations[start..]
            .iter()
            .map(|it| CorrectionRound { code: it.code.clone(), feedback: it.verdict.feedback.clone() })
            .collect(),
    }
}

/// Run the corrective loop for one task description.
pub fn run_loop(task: &str, config: &MethodConfig) -> Result<LoopResult, PipelineError> {
    if task.trim().is_empty() {
        return Err(PipelineError::EmptyTask);
    }
    config.validate()?;
    let mut iterations: Vec<Iteration> = Vec::new();
    let mut final_code = String::new();
    for round in 1..=config.max_iterations {
        let fault = |e: RoleError, iterations: Vec<Iteration>, final_code: String| LoopResult {
            iterations,
            final_code,
            status: LoopStatus::Faulted,
            iterations_used: round,
            error: Some(e.to_string()),
        };
        let context = context_for(task, &iterations, config.history_window);
        let generation = match generate(&context, &config.prompts.generator, &config.llm.generator, config.extraction) {
            Ok(g) => g,
            Err(e) => return Ok(fault(e, iterations, final_code)),
        };
        final_code = generation.code.clone();
        let observation = match observe(&generation.code, config) {
            Ok(o) => o,
            Err(e) => return Ok(fault(e, iterations, final_code)),
        };
        let mut verdict = match evaluate(
            task,
            &observation,
            &config.prompts.evaluator,
            &config.prompts.direct_evaluator,
            &config.llm.evaluator,
        ) {
            Ok(v) => v,
            Err(RoleError::MalformedVerdict { raw }) => Verdict::malformed(&raw),
            Err(e) => return Ok(fault(e, iterations, final_code)),
        };
        if !verdict.is_match && verdict.feedback.trim().is_empty() {
            verdict.feedback = UNSPECIFIED_MISMATCH.to_string();
        }
        let accepted = verdict.is_match;
        iterations.push(Iteration { code: generation.code, generator_prompt: generation.prompt.user, observation, verdict });
        if accepted {
            return Ok(LoopResult { iterations, final_code, status: LoopStatus::Accepted, iterations_used: round, error: None });
        }
    }
    Ok(LoopResult {
        iterations,
        final_code,
        status: LoopStatus::Exhausted,
        iterations_used: config.max_iterations,
        error: None,
    })
}

/// Run the loop for a dataset task, using the task's takeoff altitude for oracle observations.
pub fn run_task(task: &crate::evalbench::Task, config: &MethodConfig) -> Result<LoopResult, PipelineError> {
    let mut config = config.clone();
    config.exec.takeoff_altitude = task.h_takeoff;
    run_loop(&task.description, &config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    /// Serve from the cassette only.
    #[default]
    Replay,
    /// Call the live endpoint and append to the cassette.
    Record,
    /// Call the live endpoint without recording.
    Live,
}

/// On-disk run configuration (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub method: String,
    pub max_iterations: usize,
    pub model: String,
    pub endpoint: String,
    pub api_key_env: String,
    pub backend: BackendMode,
    pub h_takeoff: f64,
    pub tolerances: Tolerance,
    pub prompts: Option<PathBuf>,
    pub cassette: Option<PathBuf>,
    pub history_window: usize,
    pub extraction: CodeExtraction,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub seed: Option<u64>,
    pub timeout_secs: u64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let live = LiveConfig::default();
        Self {
            method: "ours".into(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            model: "o3-mini".into(),
            endpoint: live.endpoint,
            api_key_env: live.api_key_env,
            backend: BackendMode::Replay,
            h_takeoff: ExecConfig::default().takeoff_altitude,
            tolerances: Tolerance::default(),
            prompts: None,
            cassette: None,
            history_window: 1,
            extraction: CodeExtraction::default(),
            temperature: None,
            max_tokens: None,
            seed: None,
            timeout_secs: live.timeout_secs,
        }
    }
}

impl ConfigFile {
    /// Relative `prompts` and `cassette` paths resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let err = |message: String| PipelineError::Config { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut cfg: ConfigFile = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.prompts, &mut cfg.cassette].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        parse_method(&cfg.method).map_err(err)?;
        Ok(cfg)
    }

    pub fn params(&self) -> GenerationParams {
        GenerationParams { temperature: self.temperature, max_tokens: self.max_tokens, seed: self.seed }
    }

    pub fn backend(&self) -> Result<Arc<dyn LlmBackend>, PipelineError> {
        let live = || {
            LiveBackend::from_env(LiveConfig {
                endpoint: self.endpoint.clone(),
                api_key_env: self.api_key_env.clone(),
                timeout_secs: self.timeout_secs,
                ..LiveConfig::default()
            })
        };
        let cassette = || {
            self.cassette.clone().ok_or_else(|| PipelineError::Config {
                path: "<config>".into(),
                message: format!("backend {:?} needs a cassette path", self.backend),
            })
        };
        Ok(match self.backend {
            BackendMode::Replay => Arc::new(ReplayBackend::new(Arc::new(
                CassetteStore::load(cassette()?).map_err(crate::llm::LlmError::from)?,
            ))),
            BackendMode::Record => Arc::new(RecordingBackend::new(
                Arc::new(live()?),
                Arc::new(CassetteStore::open(cassette()?).map_err(crate::llm::LlmError::from)?),
            )),
            BackendMode::Live => Arc::new(live()?),
        })
    }

    /// Assemble a method config around an already-built backend.
    pub fn method_config(&self, backend: Arc<dyn LlmBackend>) -> Result<MethodConfig, PipelineError> {
        let source = parse_method(&self.method).map_err(|m| PipelineError::Config { path: "<config>".into(), message: m })?;
        let handle = LlmHandle::new(backend, &self.model).with_params(self.params());
        let mut cfg = MethodConfig::new(source, RoleBackends::shared(handle));
        cfg.max_iterations = self.max_iterations;
        cfg.exec = cfg.exec.with_takeoff_altitude(self.h_takeoff);
        cfg.history_window = self.history_window;
        cfg.extraction = self.extraction;
        if let Some(dir) = &self.prompts {
            cfg.prompts = PromptSet::load_dir(dir)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedBackend;

    const SQUARE: &str = "aw.takeoff()\np = aw.get_drone_position()\naw.fly_to([p[0], p[1], p[2] - 5])";

    fn config(source: ObservationSource, gen: &[&str], eval: &[&str]) -> MethodConfig {
        let g = LlmHandle::new(Arc::new(ScriptedBackend::queue(gen.iter().copied())), "m");
        let e = LlmHandle::new(Arc::new(ScriptedBackend::queue(eval.iter().copied())), "m");
        MethodConfig::new(source, RoleBackends { generator: g, simulator: e.clone(), evaluator: e })
    }

    #[test]
    fn immediate_acceptance() {
        let cfg = config(ObservationSource::OracleSemantic, &[SQUARE], &["VERDICT: MATCH"]);
        let r = run_loop("Take off and climb 5 more meters.", &cfg).unwrap();
        assert_eq!(r.status, LoopStatus::Accepted);
        assert_eq!(r.iterations_used, 1);
        assert_eq!(r.final_code, SQUARE);
    }

    #[test]
    fn oracle_observes_parse_errors() {
        let cfg = config(ObservationSource::OracleNumerical, &[], &[]);
        let obs = observe("aw.fly_to(", &cfg).unwrap();
        assert!(obs.prose.starts_with("The code could not be parsed"));
        assert_eq!(obs.structured, Some(vec![]));
    }

    #[test]
    fn oracle_observes_faults() {
        let cfg = config(ObservationSource::OracleSemantic, &[], &[]);
        let obs = observe("aw.fly_to([1, 0, 0])", &cfg).unwrap();
        assert!(obs.prose.contains("Execution faults:"), "{}", obs.prose);
    }

    #[test]
    fn transport_error_faults_the_loop() {
        let g = LlmHandle::new(Arc::new(ScriptedBackend::queue_results([Err("reset".to_string())])), "m");
        let cfg = MethodConfig::new(ObservationSource::None, RoleBackends::shared(g));
        let r = run_loop("t", &cfg).unwrap();
        assert_eq!(r.status, LoopStatus::Faulted);
        assert!(r.iterations.is_empty());
        assert!(r.error.unwrap().contains("reset"));
    }

    #[test]
    fn malformed_and_bare_mismatch_feedback() {
        let cfg = config(ObservationSource::OracleSemantic, &[SQUARE, SQUARE, SQUARE], &["maybe fine", "VERDICT: MISMATCH", "VERDICT: MATCH"]);
        let r = run_loop("t", &cfg).unwrap();
        assert_eq!(r.iterations_used, 3);
        assert_eq!(r.iterations[0].verdict.feedback, "maybe fine");
        assert_eq!(r.iterations[1].verdict.feedback, UNSPECIFIED_MISMATCH);
        assert!(r.iterations[1].generator_prompt.contains("maybe fine"));
        assert!(r.iterations[2].generator_prompt.contains(UNSPECIFIED_MISMATCH));
    }

    #[test]
    fn zero_iterations_rejected() {
        let cfg = config(ObservationSource::None, &[], &[]).with_max_iterations(0);
        assert!(matches!(run_loop("t", &cfg), Err(PipelineError::ZeroIterations)));
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "method = \"semantic\"\nmax_iterations = 3\nh_takeoff = 1.5\ncassette = \"c.jsonl\"\n[tolerances]\nposition = 0.05\nyaw = 0.5\n",
        )
        .unwrap();
        let cfg = ConfigFile::load(&path).unwrap();
        assert_eq!(cfg.cassette.as_deref(), Some(dir.path().join("c.jsonl").as_path()));
        assert_eq!(cfg.tolerances, Tolerance::new(0.05, 0.5));
        let mc = cfg.method_config(Arc::new(ScriptedBackend::constant("x"))).unwrap();
        assert_eq!(mc.simulation_backend, ObservationSource::OracleSemantic);
        assert_eq!(mc.max_iterations, 3);
        assert_eq!(mc.exec.takeoff_altitude, 1.5);

        std::fs::write(&path, "method = \"telepathy\"\n").unwrap();
        assert!(ConfigFile::load(&path).is_err());
        std::fs::write(&path, "metod = \"ours\"\n").unwrap();
        assert!(ConfigFile::load(&path).is_err());
    }
}
