//! System-prompt assembly for the simulator, generator, and evaluator roles.
//!
//! Every role prompt has the same skeleton (role, APIs, policies, examples).
//! Default bundles are compiled in from `assets/prompts/` and can be replaced
//! by a directory with the same layout.

mod bundle;

use std::path::Path;

use thiserror::Error;

pub use bundle::{Ablation, Component, ExamplePair, PromptBundle, MANIFEST_FILE};

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("role text must not be empty")]
    EmptyRole,
    #[error("API text must not be empty")]
    EmptyApis,
    #[error("task description must not be empty")]
    EmptyTask,
    #[error("correction round requires the prior code")]
    MissingPriorCode,
    #[error("correction round requires evaluator feedback")]
    MissingFeedback,
    #[error("observation must not be empty")]
    EmptyObservation,
    #[error("code must not be empty")]
    EmptyCode,
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed prompt manifest: {0}")]
    Manifest(String),
}

macro_rules! embedded {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/prompts/", $path)))),*]
    };
}

static EMBEDDED: &[(&str, &str)] = embedded![
    "simulator/manifest.json",
    "simulator/role.txt",
    "simulator/apis.txt",
    "simulator/policies.txt",
    "simulator/examples_intro.txt",
    "simulator/examples/climb.py",
    "simulator/examples/climb.txt",
    "simulator/examples/square.py",
    "simulator/examples/square.txt",
    "generator/manifest.json",
    "generator/role.txt",
    "generator/apis.txt",
    "generator/policies.txt",
    "generator/examples_intro.txt",
    "generator/examples/climb.py",
    "generator/examples/climb.txt",
    "generator/examples/square.py",
    "generator/examples/square.txt",
    "evaluator/manifest.json",
    "evaluator/role.txt",
    "evaluator/apis.txt",
    "evaluator/policies.txt",
    "evaluator/examples_intro.txt",
    "evaluator/examples/match.txt",
    "evaluator/examples/match_verdict.txt",
    "evaluator/examples/mismatch.txt",
    "evaluator/examples/mismatch_verdict.txt",
    "direct_evaluator/manifest.json",
    "direct_evaluator/role.txt",
    "direct_evaluator/apis.txt",
    "direct_evaluator/policies.txt",
    "direct_evaluator/examples_intro.txt",
    "direct_evaluator/examples/match.txt",
    "direct_evaluator/examples/match_verdict.txt",
    "direct_evaluator/examples/mismatch.txt",
    "direct_evaluator/examples/mismatch_verdict.txt",
];

fn embedded_bundle(role: &str) -> PromptBundle {
    PromptBundle::load_with(|rel| {
        let key = format!("{role}/{rel}");
        EMBEDDED
            .iter()
            .find(|(p, _)| *p == key)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| PromptError::Manifest(format!("no embedded prompt file {key}")))
    })
    .expect("embedded prompt bundles are valid")
}

/// Bundles for all four prompt roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub simulator: PromptBundle,
    pub generator: PromptBundle,
    pub evaluator: PromptBundle,
    /// Evaluator variant that reads code instead of an observation.
    pub direct_evaluator: PromptBundle,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            simulator: embedded_bundle("simulator"),
            generator: embedded_bundle("generator"),
            evaluator: embedded_bundle("evaluator"),
            direct_evaluator: embedded_bundle("direct_evaluator"),
        }
    }
}

impl PromptSet {
    /// Load `simulator/`, `generator/`, `evaluator/`, `direct_evaluator/` under `root`.
    /// Missing subdirectories fall back to the built-in bundle.
    pub fn load_dir(root: impl AsRef<Path>) -> Result<Self, PromptError> {
        let root = root.as_ref();
        let defaults = Self::default();
        let pick = |name: &str, fallback: PromptBundle| -> Result<PromptBundle, PromptError> {
            let dir = root.join(name);
            if dir.join(MANIFEST_FILE).exists() {
                PromptBundle::load_dir(dir)
            } else {
                Ok(fallback)
            }
        };
        Ok(Self {
            simulator: pick("simulator", defaults.simulator)?,
            generator: pick("generator", defaults.generator)?,
            evaluator: pick("evaluator", defaults.evaluator)?,
            direct_evaluator: pick("direct_evaluator", defaults.direct_evaluator)?,
        })
    }
}

/// A chat prompt: system text plus the user turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolePrompt {
    pub system: String,
    pub user: String,
}

impl RolePrompt {
    pub fn text(&self) -> String {
        format!("{}\n\n{}", self.system, self.user)
    }
}

/// Marker line that introduces the machine-readable transition block.
pub const TRANSITIONS_MARKER: &str = "TRANSITIONS:";

const TRANSITION_BLOCK_INSTRUCTION: &str = "After the description, add one final line that starts with TRANSITIONS: followed by a JSON list with one [dx, dy, dz, dyaw] entry per drone action, in execution order (meters in world NED coordinates, degrees of yaw change).";

/// The simulator's system prompt, honoring the bundle's ablation mask.
pub fn build_simulator_prompt(bundle: &PromptBundle) -> Result<String, PromptError> {
    bundle.render()
}

/// Full simulator request: system prompt plus a query carrying the code.
pub fn build_simulator_request(bundle: &PromptBundle, code: &str) -> Result<RolePrompt, PromptError> {
    if code.trim().is_empty() {
        return Err(PromptError::EmptyCode);
    }
    Ok(RolePrompt {
        system: build_simulator_prompt(bundle)?,
        user: format!("{TRANSITION_BLOCK_INSTRUCTION}\n\nQuery: \"\n{}\n\"\n\nAnswer:", code.trim_end()),
    })
}

/// One earlier round shown to the generator during correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionRound {
    pub code: String,
    pub feedback: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorContext {
    Initial { task: String },
    /// `history` is oldest first; the last entry is the round being corrected.
    Correction { task: String, history: Vec<CorrectionRound> },
}

impl GeneratorContext {
    pub fn initial(task: impl Into<String>) -> Self {
        GeneratorContext::Initial { task: task.into() }
    }

    pub fn correction(task: impl Into<String>, code: impl Into<String>, feedback: impl Into<String>) -> Self {
        GeneratorContext::Correction {
            task: task.into(),
            history: vec![CorrectionRound { code: code.into(), feedback: feedback.into() }],
        }
    }

    pub fn task(&self) -> &str {
        match self {
            GeneratorContext::Initial { task } | GeneratorContext::Correction { task, .. } => task,
        }
    }
}

fn fenced(code: &str) -> String {
    format!("```python\n{}\n```", code.trim_end())
}

pub fn build_generator_prompt(bundle: &PromptBundle, context: &GeneratorContext) -> Result<RolePrompt, PromptError> {
    let task = context.task().trim();
    if task.is_empty() {
        return Err(PromptError::EmptyTask);
    }
    let system = bundle.render()?;
    let user = match context {
        GeneratorContext::Initial { .. } => {
            format!("Write the drone control code for the following task.\nTask: {task}")
        }
        GeneratorContext::Correction { history, .. } => {
            let Some(latest) = history.last() else {
                return Err(PromptError::MissingPriorCode);
            };
            if history.iter().any(|r| r.code.trim().is_empty()) {
                return Err(PromptError::MissingPriorCode);
            }
            if history.iter().any(|r| r.feedback.trim().is_empty()) {
                return Err(PromptError::MissingFeedback);
            }
            let mut user = format!("Task: {task}\n\n");
            let earlier = &history[..history.len() - 1];
            if !earlier.is_empty() {
                user.push_str("Earlier attempts and their feedback:\n\n");
                for (i, round) in earlier.iter().enumerate() {
                    user.push_str(&format!(
                        "Attempt {}:\n{}\n\nFeedback:\n{}\n\n",
                        i + 1,
                        fenced(&round.code),
                        round.feedback.trim_end()
                    ));
                }
            }
            user.push_str(&format!(
                "Previous code:\n{}\n\nEvaluator feedback:\n{}\n\nRevise the previous code so that it resolves every mismatch listed in the feedback. Reply with the complete corrected code in a single python code block.",
                fenced(&latest.code),
                latest.feedback.trim_end()
            ));
            user
        }
    };
    Ok(RolePrompt { system, user })
}

pub fn build_evaluator_prompt(bundle: &PromptBundle, task: &str, observation: &str) -> Result<RolePrompt, PromptError> {
    if task.trim().is_empty() {
        return Err(PromptError::EmptyTask);
    }
    if observation.trim().is_empty() {
        return Err(PromptError::EmptyObservation);
    }
    Ok(RolePrompt {
        system: bundle.render()?,
        user: format!("Task: {}\n\nObservation:\n{}", task.trim(), observation.trim_end()),
    })
}

/// Evaluator prompt for the Direct method: the code itself stands in for the observation.
pub fn build_direct_evaluator_prompt(bundle: &PromptBundle, task: &str, code: &str) -> Result<RolePrompt, PromptError> {
    if task.trim().is_empty() {
        return Err(PromptError::EmptyTask);
    }
    if code.trim().is_empty() {
        return Err(PromptError::EmptyCode);
    }
    Ok(RolePrompt {
        system: bundle.render()?,
        user: format!("Task: {}\n\nCode:\n{}", task.trim(), fenced(code)),
    })
}
