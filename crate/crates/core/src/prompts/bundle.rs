use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PromptError;

/// The ablatable prompt components. Role and APIs are always rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Policies,
    Examples,
}

/// Set of omitted components.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ablation(BTreeSet<Component>);

impl Ablation {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn of(components: impl IntoIterator<Item = Component>) -> Self {
        Self(components.into_iter().collect())
    }

    pub fn omits(&self, c: Component) -> bool {
        self.0.contains(&c)
    }

    pub fn is_subset(&self, other: &Ablation) -> bool {
        self.0.is_subset(&other.0)
    }

    /// The four masks of the ablation study, in reporting order.
    pub fn study() -> [(&'static str, Ablation); 4] {
        [
            ("full", Ablation::none()),
            ("w/o policies", Ablation::of([Component::Policies])),
            ("w/o examples", Ablation::of([Component::Examples])),
            ("w/o policies & examples", Ablation::of([Component::Policies, Component::Examples])),
        ]
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let names: Vec<&str> = self
            .0
            .iter()
            .map(|c| match c {
                Component::Policies => "policies",
                Component::Examples => "examples",
            })
            .collect();
        f.write_str(&names.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePair {
    pub query: String,
    pub answer: String,
}

/// A four-component system prompt: role, APIs, policies, examples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub role_text: String,
    pub api_text: String,
    pub policies_text: String,
    pub examples_intro: String,
    pub examples: Vec<ExamplePair>,
    pub ablation: Ablation,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    role: String,
    apis: String,
    policies: String,
    #[serde(default)]
    examples_intro: Option<String>,
    #[serde(default)]
    examples: Vec<ManifestExample>,
}

#[derive(Debug, Deserialize)]
struct ManifestExample {
    query: String,
    answer: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn clean(text: String) -> String {
    text.trim_end_matches(['\n', '\r']).to_string()
}

impl PromptBundle {
    /// Load from a directory holding `manifest.json` and the files it names.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        Self::load_with(|rel| {
            let path = dir.join(rel);
            std::fs::read_to_string(&path).map_err(|source| PromptError::Io { path: path.display().to_string(), source })
        })
    }

    /// Load through an arbitrary file reader keyed by manifest-relative path.
    pub fn load_with(read: impl Fn(&str) -> Result<String, PromptError>) -> Result<Self, PromptError> {
        let manifest: Manifest = serde_json::from_str(&read(MANIFEST_FILE)?)
            .map_err(|e| PromptError::Manifest(e.to_string()))?;
        let mut examples = Vec::with_capacity(manifest.examples.len());
        for ex in &manifest.examples {
            examples.push(ExamplePair { query: clean(read(&ex.query)?), answer: clean(read(&ex.answer)?) });
        }
        let bundle = PromptBundle {
            role_text: clean(read(&manifest.role)?),
            api_text: clean(read(&manifest.apis)?),
            policies_text: clean(read(&manifest.policies)?),
            examples_intro: match &manifest.examples_intro {
                Some(p) => clean(read(p)?),
                None => String::new(),
            },
            examples,
            ablation: Ablation::none(),
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.role_text.trim().is_empty() {
            return Err(PromptError::EmptyRole);
        }
        if self.api_text.trim().is_empty() {
            return Err(PromptError::EmptyApis);
        }
        Ok(())
    }

    /// Rendered sections in fixed order, skipping ablated components.
    pub fn sections(&self) -> Vec<String> {
        let mut out = vec![format!("Role:\n{}", self.role_text), format!("APIs:\n{}", self.api_text)];
        if !self.ablation.omits(Component::Policies) && !self.policies_text.is_empty() {
            out.push(format!("Policies:\n{}", self.policies_text));
        }
        if !self.ablation.omits(Component::Examples) && !self.examples.is_empty() {
            let mut s = String::from("Examples:");
            if !self.examples_intro.is_empty() {
                s.push('\n');
                s.push_str(&self.examples_intro);
            }
            for ex in &self.examples {
                s.push_str(&format!("\n\nQuery: \"\n{}\n\"\n\nAnswer:\n\"{}\"", ex.query, ex.answer));
            }
            out.push(s);
        }
        out
    }

    pub fn render(&self) -> Result<String, PromptError> {
        self.validate()?;
        Ok(self.sections().join("\n\n"))
    }
}
