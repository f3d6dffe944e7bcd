use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{HarnessError, Result};
use crate::datamodel::SteeringCondition;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }
}

/// What a request is for. Never sent over the wire; offline endpoints use it
/// to answer without parsing prompts.
#[derive(Clone, Debug, PartialEq)]
pub enum RequestTag {
    Question { condition: SteeringCondition, question_id: String, value_id: String },
    Judge { text: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub tag: RequestTag,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Rate limiting, server errors, timeouts and broken connections.
    #[error("transient failure: {0}")]
    Retryable(String),
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("request failed: {0}")]
    Fatal(String),
}

/// A chat-completion service. Implementations must be callable from several
/// threads at once.
pub trait ChatEndpoint: Sync {
    /// Stable description recorded in run manifests. Must not contain secrets.
    fn identity(&self) -> String;

    fn complete(&self, request: &ChatRequest) -> std::result::Result<String, TransportError>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    /// Environment variable holding the bearer token. `None` for endpoints
    /// without authentication.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub max_concurrency: usize,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key_env: None,
            timeout_secs: 60,
            max_retries: 5,
            max_concurrency: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_concurrency == 0 {
            return Err(HarnessError::InvalidConfig("max_concurrency must be at least 1".into()));
        }
        if self.timeout_secs == 0 {
            return Err(HarnessError::InvalidConfig("timeout must be positive".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(HarnessError::InvalidConfig(format!("base url must be http(s): {}", self.base_url)));
        }
        Ok(())
    }
}

/// OpenAI-style `POST {base_url}/chat/completions` client.
pub struct HttpChatEndpoint {
    config: EndpointConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpChatEndpoint {
    /// Fails with [`HarnessError::Auth`] when the configured key variable is
    /// unset or empty, so no request goes out unauthenticated.
    pub fn new(config: EndpointConfig) -> Result<Self> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(k) if !k.trim().is_empty() => Some(k),
                _ => return Err(HarnessError::Auth(format!("environment variable {var} is not set"))),
            },
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        Ok(HttpChatEndpoint { config, api_key, agent })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }
}

fn classify_status(status: u16, body: &str) -> TransportError {
    let snippet: String = body.chars().take(200).collect();
    match status {
        429 | 500..=599 => TransportError::Retryable(format!("HTTP {status}: {snippet}")),
        401 | 403 => TransportError::Auth(format!("HTTP {status}")),
        _ => TransportError::Fatal(format!("HTTP {status}: {snippet}")),
    }
}

/// Extracts `choices[0].message.content` from a completion response.
pub fn completion_text(body: &Value) -> Option<String> {
    body.get("choices")?.get(0)?.get("message")?.get("content")?.as_str().map(str::to_string)
}

impl ChatEndpoint for HttpChatEndpoint {
    fn identity(&self) -> String {
        format!("{} model={}", self.url(), self.config.model_name)
    }

    fn complete(&self, request: &ChatRequest) -> std::result::Result<String, TransportError> {
        let body = json!({
            "model": self.config.model_name,
            "messages": request.messages,
            "temperature": request.temperature,
        });
        let mut call = self.agent.post(self.url()).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = call.send(body.to_string()).map_err(|e| TransportError::Retryable(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| TransportError::Retryable(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &text));
        }
        let parsed: Value =
            serde_json::from_str(&text).map_err(|e| TransportError::Fatal(format!("malformed response: {e}")))?;
        completion_text(&parsed)
            .ok_or_else(|| TransportError::Fatal("response has no choices[0].message.content".into()))
    }
}
