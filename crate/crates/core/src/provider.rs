//! Text-completion providers used by annotation and generation.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    Response(String),
    #[error("no recorded response for prompt {0}")]
    NoReplay(String),
    #[error("provider has no responses")]
    Empty,
    #[error("cannot load provider data from {path}: {reason}")]
    Load { path: PathBuf, reason: String },
    #[error("unknown provider spec '{0}'")]
    Spec(String),
}

pub trait Provider: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;

    /// How many requests may be outstanding at once.
    fn max_in_flight(&self) -> usize {
        1
    }
}

/// Hex SHA-256 of a prompt; the key of replay files.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Serves canned responses in order and then keeps repeating the last one.
#[derive(Debug)]
pub struct FixedProvider {
    responses: Vec<String>,
    cursor: Mutex<usize>,
}

impl FixedProvider {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        FixedProvider {
            responses: responses.into_iter().map(Into::into).collect(),
            cursor: Mutex::new(0),
        }
    }
}

impl Provider for FixedProvider {
    fn complete(&self, _prompt: &str) -> Result<String, ProviderError> {
        let mut cur = self.cursor.lock().unwrap_or_else(|e| e.into_inner());
        let i = (*cur).min(self.responses.len().checked_sub(1).ok_or(ProviderError::Empty)?);
        *cur += 1;
        Ok(self.responses[i].clone())
    }
}

/// Answers from a recording keyed by [`prompt_hash`]. Each key holds a list
/// of responses consumed in order; the last one repeats.
#[derive(Debug, Default)]
pub struct ReplayProvider {
    table: HashMap<String, Vec<String>>,
    cursors: Mutex<HashMap<String, usize>>,
}

impl ReplayProvider {
    pub fn new(table: HashMap<String, Vec<String>>) -> Self {
        ReplayProvider {
            table,
            cursors: Mutex::new(HashMap::new()),
        }
    }

    /// Records `responses` for `prompt`.
    pub fn insert(&mut self, prompt: &str, responses: Vec<String>) {
        self.table.insert(prompt_hash(prompt), responses);
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let load_err = |reason: String| ProviderError::Load {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
        let table = serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))?;
        Ok(ReplayProvider::new(table))
    }

    pub fn to_json(&self) -> String {
        let sorted: std::collections::BTreeMap<_, _> = self.table.iter().collect();
        serde_json::to_string_pretty(&sorted).expect("string map serializes")
    }
}

impl Provider for ReplayProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let key = prompt_hash(prompt);
        let list = self.table.get(&key).ok_or_else(|| ProviderError::NoReplay(key.clone()))?;
        let last = list.len().checked_sub(1).ok_or(ProviderError::Empty)?;
        let mut cursors = self.cursors.lock().unwrap_or_else(|e| e.into_inner());
        let cur = cursors.entry(key).or_insert(0);
        let i = (*cur).min(last);
        *cur += 1;
        Ok(list[i].clone())
    }

    fn max_in_flight(&self) -> usize {
        usize::MAX
    }
}

/// Settings for an OpenAI-style chat completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpSettings {
    pub endpoint: String,
    pub model: String,
    /// Sent as a bearer token when present.
    pub api_key: Option<String>,
    pub timeout_secs: u64,
    pub temperature: f64,
    pub max_in_flight: usize,
    /// Extra attempts after a transport failure.
    pub retries: u32,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: "default".into(),
            api_key: None,
            timeout_secs: 60,
            temperature: 0.0,
            max_in_flight: 4,
            retries: 2,
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

pub struct HttpChatProvider {
    settings: HttpSettings,
    client: reqwest::blocking::Client,
}

impl HttpChatProvider {
    pub fn new(settings: HttpSettings) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(settings.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(HttpChatProvider { settings, client })
    }

    fn attempt(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = ChatRequest {
            model: &self.settings.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.settings.temperature,
        };
        let mut req = self.client.post(&self.settings.endpoint).json(&body);
        if let Some(key) = &self.settings.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ProviderError::Transport(e.to_string()))?;
        let resp = resp
            .error_for_status()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let value: serde_json::Value = resp.json().map_err(|e| ProviderError::Response(e.to_string()))?;
        extract_content(&value)
    }
}

/// First message content of a chat response.
fn extract_content(value: &serde_json::Value) -> Result<String, ProviderError> {
    value
        .pointer("/choices/0/message/content")
        .or_else(|| value.pointer("/message/content"))
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| ProviderError::Response("no message content".into()))
}

impl Provider for HttpChatProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let mut last = None;
        for _ in 0..=self.settings.retries {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(e @ ProviderError::Transport(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn max_in_flight(&self) -> usize {
        self.settings.max_in_flight.max(1)
    }
}

/// Builds a provider from a spec string: `replay:<file>`,
/// `fixed:<file>` (a JSON list of responses), or `http`.
pub fn from_spec(spec: &str, http: &HttpSettings) -> Result<Box<dyn Provider>, ProviderError> {
    if let Some(path) = spec.strip_prefix("replay:") {
        return Ok(Box::new(ReplayProvider::load(Path::new(path))?));
    }
    if let Some(path) = spec.strip_prefix("fixed:") {
        let load_err = |reason: String| ProviderError::Load {
            path: PathBuf::from(path),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
        let list: Vec<String> = serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))?;
        return Ok(Box::new(FixedProvider::new(list)));
    }
    if spec == "http" {
        return Ok(Box::new(HttpChatProvider::new(http.clone())?));
    }
    Err(ProviderError::Spec(spec.to_string()))
}
