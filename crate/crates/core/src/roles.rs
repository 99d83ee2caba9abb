//! Generator, simulator and evaluator: prompt in, parsed domain value out.

use std::fmt;
use std::sync::{Arc, LazyLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interpreter::{render_faults, render_numerical, render_semantic, transitions_of, ExecutionTrace, ParseError, Transition};
use crate::llm::{complete, CompletionRequest, GenerationParams, LlmBackend, LlmError};
use crate::prompts::{
    build_direct_evaluator_prompt, build_evaluator_prompt, build_generator_prompt, build_simulator_request,
    GeneratorContext, PromptBundle, PromptError, RolePrompt, TRANSITIONS_MARKER,
};

/// Simulation replies shorter than this (after trimming) are treated as degenerate.
pub const MIN_SIMULATION_REPLY: usize = 12;

#[derive(Debug, Error)]
pub enum RoleError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("the model reply contained no code")]
    EmptyReply,
    #[error("simulation reply is {len} characters, below the minimum of {min}")]
    DegenerateSimulation { len: usize, min: usize },
    #[error("evaluator reply has no VERDICT line")]
    MalformedVerdict { raw: String },
}

/// A backend plus the model name and sampling parameters sent with every call.
#[derive(Clone)]
pub struct LlmHandle {
    pub backend: Arc<dyn LlmBackend>,
    pub model: String,
    pub params: GenerationParams,
}

impl fmt::Debug for LlmHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmHandle")
            .field("backend", &self.backend.describe())
            .field("model", &self.model)
            .field("params", &self.params)
            .finish()
    }
}

impl LlmHandle {
    pub fn new(backend: Arc<dyn LlmBackend>, model: impl Into<String>) -> Self {
        Self { backend, model: model.into(), params: GenerationParams::default() }
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    pub fn request(&self, prompt: &RolePrompt) -> CompletionRequest {
        CompletionRequest::new(&prompt.system, &prompt.user, &self.model, self.params.clone())
    }

    pub fn call(&self, prompt: &RolePrompt) -> Result<String, LlmError> {
        complete(&self.request(prompt), self.backend.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSource {
    LlmSim,
    OracleSemantic,
    OracleNumerical,
    /// Direct method: the "observation" is the code itself.
    None,
}

impl ObservationSource {
    pub const ALL: [ObservationSource; 4] =
        [ObservationSource::LlmSim, ObservationSource::OracleSemantic, ObservationSource::OracleNumerical, ObservationSource::None];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservationSource::LlmSim => "llm_sim",
            ObservationSource::OracleSemantic => "oracle_semantic",
            ObservationSource::OracleNumerical => "oracle_numerical",
            ObservationSource::None => "none",
        }
    }

    pub fn is_oracle(self) -> bool {
        matches!(self, ObservationSource::OracleSemantic | ObservationSource::OracleNumerical)
    }
}

impl fmt::Display for ObservationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ObservationSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown observation source {s:?} (expected llm_sim, oracle_semantic, oracle_numerical or none)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub prose: String,
    pub structured: Option<Vec<Transition>>,
    pub source: ObservationSource,
}

impl Observation {
    /// Narration of `trace`, with any faults appended after a blank line.
    pub fn oracle_semantic(trace: &ExecutionTrace) -> Self {
        Self { prose: with_faults(render_semantic(trace), trace), structured: Some(transitions_of(trace)), source: ObservationSource::OracleSemantic }
    }

    /// Absolute state lines of `trace`, with any faults appended.
    pub fn oracle_numerical(trace: &ExecutionTrace) -> Self {
        Self { prose: with_faults(render_numerical(trace), trace), structured: Some(transitions_of(trace)), source: ObservationSource::OracleNumerical }
    }

    /// An oracle observation for code that failed to parse.
    pub fn parse_failure(error: &ParseError, source: ObservationSource) -> Self {
        Self { prose: format!("The code could not be parsed: {error}"), structured: Some(Vec::new()), source }
    }

    pub fn direct(code: &str) -> Self {
        Self { prose: code.to_string(), structured: None, source: ObservationSource::None }
    }
}

fn with_faults(text: String, trace: &ExecutionTrace) -> String {
    if trace.faults.is_empty() {
        text
    } else {
        format!("{text}\n\n{}", render_faults(trace))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MismatchedAction {
    /// As numbered by the evaluator (1-based).
    pub index: usize,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(rename = "match")]
    pub is_match: bool,
    pub feedback: String,
    pub mismatched_actions: Vec<MismatchedAction>,
}

impl Verdict {
    /// A reply without a verdict line counts as a mismatch, with the raw reply as feedback.
    pub fn malformed(raw: &str) -> Self {
        let feedback = if raw.trim().is_empty() { "The evaluator returned an empty reply.".to_string() } else { raw.trim().to_string() };
        Self { is_match: false, feedback, mismatched_actions: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeExtraction {
    #[default]
    LastBlock,
    FirstBlock,
}

static FENCE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)```[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)```").unwrap());

/// Contents of the chosen fenced block, or the whole reply when it has none.
pub fn extract_code(reply: &str, mode: CodeExtraction) -> Option<String> {
    let blocks: Vec<&str> = FENCE.captures_iter(reply).map(|c| c.get(1).unwrap().as_str()).collect();
    let picked = match mode {
        CodeExtraction::LastBlock => blocks.last().copied(),
        CodeExtraction::FirstBlock => blocks.first().copied(),
    };
    let code = picked.unwrap_or(reply).trim_matches(['\n', '\r']).trim_end();
    (!code.trim().is_empty()).then(|| code.to_string())
}

/// A generator call together with the exact prompt that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub code: String,
    pub prompt: RolePrompt,
}

pub fn generate(
    context: &GeneratorContext,
    bundle: &PromptBundle,
    llm: &LlmHandle,
    mode: CodeExtraction,
) -> Result<Generation, RoleError> {
    let prompt = build_generator_prompt(bundle, context)?;
    let reply = llm.call(&prompt)?;
    let code = extract_code(&reply, mode).ok_or(RoleError::EmptyReply)?;
    Ok(Generation { code, prompt })
}

/// Split a simulator reply into prose and the optional transition block.
pub fn split_simulation_reply(reply: &str) -> (String, Option<Vec<Transition>>) {
    let text = reply.trim();
    if let Some(pos) = text.rfind(TRANSITIONS_MARKER) {
        let line_start = text[..pos].rfind('\n').map_or(0, |i| i + 1);
        if text[line_start..pos].trim().is_empty() {
            let block = text[pos + TRANSITIONS_MARKER.len()..].trim().trim_matches('`').trim();
            if let Ok(list) = serde_json::from_str::<Vec<Transition>>(block) {
                return (text[..line_start].trim_end().to_string(), Some(list));
            }
        }
    }
    let (head, last) = text.rsplit_once('\n').unwrap_or(("", text));
    if let Ok(list) = serde_json::from_str::<Vec<Transition>>(last.trim()) {
        let prose = if head.trim().is_empty() { text } else { head.trim_end() };
        return (prose.to_string(), Some(list));
    }
    (text.to_string(), None)
}

pub fn simulate_llm(code: &str, bundle: &PromptBundle, llm: &LlmHandle) -> Result<Observation, RoleError> {
    let prompt = build_simulator_request(bundle, code)?;
    let reply = llm.call(&prompt)?;
    let len = reply.trim().chars().count();
    if len < MIN_SIMULATION_REPLY {
        return Err(RoleError::DegenerateSimulation { len, min: MIN_SIMULATION_REPLY });
    }
    let (prose, structured) = split_simulation_reply(&reply);
    Ok(Observation { prose, structured, source: ObservationSource::LlmSim })
}

static VERDICT_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[#*_\s]*verdict[*_\s]*:[*_\s]*(mismatch|match)\b[*_\s]*(.*)$").unwrap());
static ACTION_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:[-*\u{2022}]\s*)?\**action\s+(\d+)\**\s*[:.)]\s*(.+?)\s*$").unwrap());

pub fn parse_verdict(reply: &str) -> Result<Verdict, RoleError> {
    let text = reply.trim();
    let mut lines = text.lines();
    let first = lines.next().unwrap_or("");
    let caps = VERDICT_LINE.captures(first.trim()).ok_or_else(|| RoleError::MalformedVerdict { raw: reply.to_string() })?;
    let is_match = caps[1].eq_ignore_ascii_case("match");
    let mut feedback = caps[2].trim().to_string();
    let rest = lines.collect::<Vec<_>>().join("\n");
    if !rest.trim().is_empty() {
        if !feedback.is_empty() {
            feedback.push('\n');
        }
        feedback.push_str(rest.trim());
    }
    let mismatched_actions = if is_match {
        Vec::new()
    } else {
        feedback
            .lines()
            .filter_map(|l| ACTION_LINE.captures(l))
            .filter_map(|c| Some(MismatchedAction { index: c[1].parse().ok()?, description: c[2].to_string() }))
            .collect()
    };
    Ok(Verdict { is_match, feedback, mismatched_actions })
}

/// Judge an observation against the task. Direct observations use the code-reading prompt.
pub fn evaluate(
    task: &str,
    observation: &Observation,
    bundle: &PromptBundle,
    direct_bundle: &PromptBundle,
    llm: &LlmHandle,
) -> Result<Verdict, RoleError> {
    let prompt = match observation.source {
        ObservationSource::None => build_direct_evaluator_prompt(direct_bundle, task, &observation.prose)?,
        _ => build_evaluator_prompt(bundle, task, &observation.prose)?,
    };
    parse_verdict(&llm.call(&prompt)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpreter::{run_source, DroneState, ExecConfig};
    use crate::llm::ScriptedBackend;
    use crate::prompts::PromptSet;

    fn handle(replies: &[&str]) -> LlmHandle {
        LlmHandle::new(Arc::new(ScriptedBackend::queue(replies.iter().copied())), "test-model")
    }

    #[test]
    fn extraction_prefers_last_block() {
        let reply = "Draft:\n```python\naw.takeoff()\n```\nFinal:\n```python\naw.takeoff()\naw.land()\n```\n";
        assert_eq!(extract_code(reply, CodeExtraction::LastBlock).unwrap(), "aw.takeoff()\naw.land()");
        assert_eq!(extract_code(reply, CodeExtraction::FirstBlock).unwrap(), "aw.takeoff()");
        assert_eq!(extract_code("aw.takeoff()\n", CodeExtraction::LastBlock).unwrap(), "aw.takeoff()");
        assert_eq!(extract_code("  \n", CodeExtraction::LastBlock), None);
        assert_eq!(extract_code("```python\n```", CodeExtraction::LastBlock), None);
    }

    #[test]
    fn generate_returns_code_verbatim() {
        let code = "aw.takeoff()\nposition = aw.get_drone_position()\naw.fly_to([position[0], position[1], position[2] - 5])";
        let g = generate(
            &GeneratorContext::initial("Fly up 5 meters."),
            &PromptSet::default().generator,
            &handle(&[&format!("```python\n{code}\n```")]),
            CodeExtraction::LastBlock,
        )
        .unwrap();
        assert_eq!(g.code, code);
        assert!(g.prompt.user.ends_with("Task: Fly up 5 meters."));
        let err = generate(&GeneratorContext::initial("t"), &PromptSet::default().generator, &handle(&[""]), CodeExtraction::LastBlock);
        assert!(matches!(err, Err(RoleError::EmptyReply)));
    }

    #[test]
    fn simulation_reply_without_block() {
        let obs = simulate_llm("aw.takeoff()", &PromptSet::default().simulator, &handle(&["The drone takes off."])).unwrap();
        assert_eq!(obs.prose, "The drone takes off.");
        assert_eq!(obs.structured, None);
        assert_eq!(obs.source, ObservationSource::LlmSim);
    }

    #[test]
    fn simulation_block_matches_interpreter() {
        let oracle = run_source("aw.takeoff()", DroneState::grounded(), &ExecConfig::default()).unwrap();
        for reply in [
            "The drone takes off and climbs 2.5 meters.\n[[0,0,-2.5,0]]",
            "The drone takes off and climbs 2.5 meters.\nTRANSITIONS: [[0,0,-2.5,0]]",
            "The drone takes off and climbs 2.5 meters.\nTRANSITIONS:\n[[0, 0, -2.5, 0]]",
        ] {
            let obs = simulate_llm("aw.takeoff()", &PromptSet::default().simulator, &handle(&[reply])).unwrap();
            assert_eq!(obs.structured.as_deref(), Some(oracle.transitions.as_slice()), "{reply}");
            assert_eq!(obs.prose, "The drone takes off and climbs 2.5 meters.");
        }
        let (prose, s) = split_simulation_reply("[[0,0,-2.5,0]]");
        assert_eq!(prose, "[[0,0,-2.5,0]]");
        assert_eq!(s.unwrap().len(), 1);
    }

    #[test]
    fn degenerate_simulation() {
        let r = simulate_llm("aw.takeoff()", &PromptSet::default().simulator, &handle(&["ok"]));
        assert!(matches!(r, Err(RoleError::DegenerateSimulation { len: 2, .. })));
    }

    #[test]
    fn verdict_parsing() {
        let v = parse_verdict("VERDICT: MATCH").unwrap();
        assert!(v.is_match && v.mismatched_actions.is_empty() && v.feedback.is_empty());

        let reply = "VERDICT: MISMATCH\n- Action 3: the drone flies 3 meters north, but the task requires 5 meters.\n- Action 5: flies 3 meters east, but the task requires 5 meters.";
        let v = parse_verdict(reply).unwrap();
        assert!(!v.is_match);
        assert_eq!(v.mismatched_actions.len(), 2);
        assert_eq!(v.mismatched_actions[0].index, 3);
        assert!(v.feedback.starts_with("- Action 3"));

        let v = parse_verdict("**Verdict:** mismatch\nThe square is too small.").unwrap();
        assert!(!v.is_match && v.mismatched_actions.is_empty());
        assert_eq!(v.feedback, "The square is too small.");

        assert!(matches!(parse_verdict("maybe fine"), Err(RoleError::MalformedVerdict { .. })));
        assert!(!Verdict::malformed("maybe fine").is_match);
    }

    #[test]
    fn direct_observation_uses_code_prompt() {
        let backend = Arc::new(ScriptedBackend::queue(["VERDICT: MATCH"]));
        let llm = LlmHandle::new(backend.clone(), "m");
        let set = PromptSet::default();
        let v = evaluate("Take off.", &Observation::direct("aw.takeoff()"), &set.evaluator, &set.direct_evaluator, &llm).unwrap();
        assert!(v.is_match);
        let sent = &backend.requests()[0];
        assert!(sent.last_user().contains("Code:\n```python\naw.takeoff()\n```"));
    }

    #[test]
    fn oracle_semantic_round_trips() {
        let src = "aw.takeoff()\np = aw.get_drone_position()\naw.fly_to([p[0] + 5, p[1] - 2, p[2] - 1.5])\naw.set_yaw(-45)";
        let trace = run_source(src, DroneState::grounded(), &ExecConfig::default()).unwrap();
        let obs = Observation::oracle_semantic(&trace);
        assert_eq!(crate::interpreter::parse_narration(&obs.prose), obs.structured);
    }
}
