use std::collections::VecDeque;
use std::sync::Mutex;

use super::{CompletionRequest, LlmBackend, LlmError};

type Responder = Box<dyn Fn(&CompletionRequest) -> Result<String, LlmError> + Send + Sync>;

enum Script {
    Queue(Mutex<VecDeque<Result<String, String>>>),
    Responder(Responder),
}

/// Deterministic stand-in for a model: a reply queue or a pure function of the request.
///
/// Every request it receives is logged, so tests can inspect prompts.
pub struct ScriptedBackend {
    script: Script,
    log: Mutex<Vec<CompletionRequest>>,
}

impl ScriptedBackend {
    /// Replies in order; a call past the end fails with `ScriptExhausted`.
    pub fn queue<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::queue_results(replies.into_iter().map(|s| Ok(s.into())))
    }

    /// Like [`queue`](Self::queue), where `Err(msg)` entries surface as transport errors.
    pub fn queue_results(replies: impl IntoIterator<Item = Result<String, String>>) -> Self {
        Self { script: Script::Queue(Mutex::new(replies.into_iter().collect())), log: Mutex::new(Vec::new()) }
    }

    /// The same reply for every call.
    pub fn constant(reply: impl Into<String>) -> Self {
        let reply = reply.into();
        Self::responder(move |_| Ok(reply.clone()))
    }

    pub fn responder(f: impl Fn(&CompletionRequest) -> Result<String, LlmError> + Send + Sync + 'static) -> Self {
        Self { script: Script::Responder(Box::new(f)), log: Mutex::new(Vec::new()) }
    }

    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.log.lock().expect("log poisoned").clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("log poisoned").len()
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        self.log.lock().expect("log poisoned").push(request.clone());
        match &self.script {
            Script::Queue(q) => match q.lock().expect("queue poisoned").pop_front() {
                Some(Ok(text)) => Ok(text),
                Some(Err(message)) => Err(LlmError::Transport { attempts: 1, message }),
                None => Err(LlmError::ScriptExhausted),
            },
            Script::Responder(f) => f(request),
        }
    }

    fn describe(&self) -> String {
        "scripted".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::GenerationParams;

    #[test]
    fn queue_replies_in_order_then_exhausts() {
        let b = ScriptedBackend::queue(["code v1", "code v2"]);
        let r = CompletionRequest::new("s", "u", "m", GenerationParams::default());
        assert_eq!(b.complete(&r).unwrap(), "code v1");
        assert_eq!(b.complete(&r).unwrap(), "code v2");
        assert!(matches!(b.complete(&r), Err(LlmError::ScriptExhausted)));
        assert_eq!(b.call_count(), 3);
    }

    #[test]
    fn queued_failures_are_transport_errors() {
        let b = ScriptedBackend::queue_results([Err("connection reset".to_string())]);
        let r = CompletionRequest::new("s", "u", "m", GenerationParams::default());
        assert!(matches!(b.complete(&r), Err(LlmError::Transport { .. })));
    }
}
