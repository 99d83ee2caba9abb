//! Chat-completion client with live, record/replay, and scripted backends.
//!
//! Every role talks to an [`LlmBackend`]; the pipeline only ever sees the
//! returned text, so swapping a live endpoint for a cassette or a script
//! leaves the loop's behavior unchanged.

mod cassette;
mod live;
mod scripted;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cassette::{Cassette, CassetteError, CassetteRecord, CassetteStore, CASSETTE_FORMAT, CASSETTE_VERSION};
pub use live::{LiveBackend, LiveConfig};
pub use scripted::ScriptedBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: ChatRole::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system: String,
    pub messages: Vec<ChatMessage>,
    pub model: String,
    pub params: GenerationParams,
}

/// Content hash of a request; the cassette lookup key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReplayKey(pub String);

impl fmt::Display for ReplayKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl CompletionRequest {
    /// A single-turn request.
    pub fn new(system: impl Into<String>, user: impl Into<String>, model: impl Into<String>, params: GenerationParams) -> Self {
        Self { system: system.into(), messages: vec![ChatMessage::user(user)], model: model.into(), params }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.system.trim().is_empty() {
            return Err(LlmError::InvalidRequest("system prompt is empty".into()));
        }
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("no messages".into()));
        }
        for (i, m) in self.messages.iter().enumerate() {
            let expected = if i % 2 == 0 { ChatRole::User } else { ChatRole::Assistant };
            if m.role != expected {
                return Err(LlmError::InvalidRequest(format!("message {i} should be from {expected:?}")));
            }
        }
        if self.messages.len() % 2 == 0 {
            return Err(LlmError::InvalidRequest("conversation must end with a user message".into()));
        }
        Ok(())
    }

    pub fn key(&self) -> ReplayKey {
        // serde_json writes fields in declaration order, so this encoding is canonical
        let canonical = serde_json::to_vec(self).expect("request serialization is infallible");
        ReplayKey(hex::encode(Sha256::digest(&canonical)))
    }

    pub fn last_user(&self) -> &str {
        self.messages.iter().rev().find(|m| m.role == ChatRole::User).map_or("", |m| m.content.as_str())
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    Decode(String),
    #[error("replay miss: no recorded response for request {key}")]
    ReplayMiss { key: ReplayKey },
    #[error("scripted backend has no replies left")]
    ScriptExhausted,
    #[error("environment variable {0} holding the API key is not set")]
    MissingCredential(String),
    #[error(transparent)]
    Cassette(#[from] CassetteError),
}

/// A source of assistant replies.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError>;

    fn describe(&self) -> String {
        "backend".into()
    }
}

/// Validate, then dispatch.
pub fn complete(request: &CompletionRequest, backend: &dyn LlmBackend) -> Result<String, LlmError> {
    request.validate()?;
    backend.complete(request)
}

/// Serves responses from a cassette; never reaches the network.
pub struct ReplayBackend {
    store: Arc<CassetteStore>,
}

impl ReplayBackend {
    pub fn new(store: Arc<CassetteStore>) -> Self {
        Self { store }
    }
}

impl LlmBackend for ReplayBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        let key = request.key();
        self.store.lookup(&key).ok_or(LlmError::ReplayMiss { key })
    }

    fn describe(&self) -> String {
        format!("replay({})", self.store.describe())
    }
}

/// Wraps another backend and appends every fresh response to a cassette.
pub struct RecordingBackend {
    inner: Arc<dyn LlmBackend>,
    store: Arc<CassetteStore>,
}

impl RecordingBackend {
    pub fn new(inner: Arc<dyn LlmBackend>, store: Arc<CassetteStore>) -> Self {
        Self { inner, store }
    }
}

impl LlmBackend for RecordingBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        let response = self.inner.complete(request)?;
        self.store.record(request, &response)?;
        Ok(response)
    }

    fn describe(&self) -> String {
        format!("record({} -> {})", self.inner.describe(), self.store.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(user: &str) -> CompletionRequest {
        CompletionRequest::new("sys", user, "o3-mini", GenerationParams::default())
    }

    #[test]
    fn keys_are_stable_and_sensitive() {
        assert_eq!(req("a").key(), req("a").key());
        assert_ne!(req("a").key(), req("b").key());
        let mut seeded = req("a");
        seeded.params.seed = Some(1);
        assert_ne!(seeded.key(), req("a").key());
        let mut other_model = req("a");
        other_model.model = "o4-mini".into();
        assert_ne!(other_model.key(), req("a").key());
        assert_eq!(req("a").key().0.len(), 64);
    }

    #[test]
    fn validation_enforces_alternation() {
        assert!(req("a").validate().is_ok());
        let mut r = req("a");
        r.messages.push(ChatMessage::assistant("b"));
        assert!(r.validate().is_err());
        r.messages.push(ChatMessage::user("c"));
        assert!(r.validate().is_ok());
        r.system.clear();
        assert!(r.validate().is_err());
    }

    #[test]
    fn replay_hit_and_miss() {
        let store = Arc::new(CassetteStore::in_memory());
        store.record(&req("a"), "recorded text").unwrap();
        let replay = ReplayBackend::new(store);
        assert_eq!(complete(&req("a"), &replay).unwrap(), "recorded text");
        assert!(matches!(complete(&req("z"), &replay), Err(LlmError::ReplayMiss { .. })));
    }

    #[test]
    fn recording_then_replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let store = Arc::new(CassetteStore::open(&path).unwrap());
        let rec = RecordingBackend::new(Arc::new(ScriptedBackend::queue(["one", "two"])), store);
        assert_eq!(rec.complete(&req("a")).unwrap(), "one");
        assert_eq!(rec.complete(&req("b")).unwrap(), "two");

        let replay = ReplayBackend::new(Arc::new(CassetteStore::load(&path).unwrap()));
        assert_eq!(replay.complete(&req("b")).unwrap(), "two");
        assert_eq!(replay.complete(&req("a")).unwrap(), "one");
    }
}
