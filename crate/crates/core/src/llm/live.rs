use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use ureq::Agent;

use super::{CompletionRequest, LlmBackend, LlmError};

/// Connection settings for an OpenAI-compatible `/chat/completions` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    api_key: String,
    agent: Agent,
}

impl LiveBackend {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: LiveConfig) -> Result<Self, LlmError> {
        let api_key =
            std::env::var(&config.api_key_env).map_err(|_| LlmError::MissingCredential(config.api_key_env.clone()))?;
        Ok(Self::with_key(config, api_key))
    }

    pub fn with_key(config: LiveConfig, api_key: impl Into<String>) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, api_key: api_key.into(), agent }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'))
    }

    fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        let mut resp = self
            .agent
            .post(&self.url())
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| Attempt::Retry(LlmError::Transport { attempts: 1, message: e.to_string() }))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Retry(LlmError::Transport { attempts: 1, message: e.to_string() }))?;
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(LlmError::Http { status, body: text }));
        }
        if !(200..300).contains(&status) {
            return Err(Attempt::Fatal(LlmError::Http { status, body: text }));
        }
        extract_content(&text).map_err(Attempt::Fatal)
    }
}

enum Attempt {
    Retry(LlmError),
    Fatal(LlmError),
}

pub(crate) fn request_body(request: &CompletionRequest) -> Value {
    let mut messages = vec![json!({"role": "system", "content": request.system})];
    messages.extend(request.messages.iter().map(|m| json!({"role": m.role, "content": m.content})));
    let mut body = json!({"model": request.model, "messages": messages});
    let p = &request.params;
    if let Some(t) = p.temperature {
        body["temperature"] = json!(t);
    }
    if let Some(n) = p.max_tokens {
        body["max_tokens"] = json!(n);
    }
    if let Some(s) = p.seed {
        body["seed"] = json!(s);
    }
    body
}

pub(crate) fn extract_content(text: &str) -> Result<String, LlmError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LlmError::Decode(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LlmError::Decode("missing choices[0].message.content".into()))
}

impl LlmBackend for LiveBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        let body = request_body(request);
        let attempts = self.config.max_attempts.max(1);
        let mut last = None;
        for n in 1..=attempts {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    last = Some(e);
                    if n < attempts {
                        thread::sleep(Duration::from_millis(self.config.backoff_ms << (n - 1)));
                    }
                }
            }
        }
        Err(match last {
            Some(LlmError::Transport { message, .. }) => LlmError::Transport { attempts, message },
            Some(e) => e,
            None => LlmError::Transport { attempts, message: "no attempt made".into() },
        })
    }

    fn describe(&self) -> String {
        format!("live({})", self.config.endpoint)
    }
}
