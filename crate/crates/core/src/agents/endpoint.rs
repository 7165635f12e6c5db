//! Chat-completion endpoints: a live HTTP client and a file-backed replay mock
//! speaking the same contract.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::AgentError;
use crate::error::{Error, Result};

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ChatRequest {
    /// Stable fingerprint of model, messages, and temperature. The seed is
    /// left out so fixtures survive changes to run seeds.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Keyed<'a> {
            model: &'a str,
            messages: &'a [ChatMessage],
            temperature: f64,
        }
        let body = serde_json::to_vec(&Keyed {
            model: &self.model,
            messages: &self.messages,
            temperature: self.temperature,
        })
        .expect("request serializes");
        hex::encode(Sha256::digest(&body))
    }
}

pub trait ChatEndpoint: Send {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, AgentError>;
}

/// Endpoint settings as they appear in agent spec strings.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointConfig {
    pub model: String,
    pub base_url: String,
    pub api_key_env: String,
    /// Serve completions from a fixture instead of the network.
    pub replay: Option<PathBuf>,
    /// Append every live completion to this fixture file.
    pub record: Option<PathBuf>,
    pub max_attempts: u32,
    pub timeout: Duration,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            model: "gpt-3.5-turbo-1106".into(),
            base_url: DEFAULT_BASE_URL.into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            replay: None,
            record: None,
            max_attempts: 4,
            timeout: Duration::from_secs(120),
        }
    }
}

impl EndpointConfig {
    pub fn connect(&self) -> Result<Box<dyn ChatEndpoint>> {
        if let Some(path) = &self.replay {
            return Ok(Box::new(ReplayEndpoint::load(path)?));
        }
        let http: Box<dyn ChatEndpoint> = Box::new(HttpEndpoint::new(self)?);
        Ok(match &self.record {
            Some(path) => Box::new(RecordingEndpoint {
                inner: http,
                path: path.clone(),
            }),
            None => http,
        })
    }
}

/// OpenAI-compatible `POST {base_url}/chat/completions` client.
pub struct HttpEndpoint {
    client: reqwest::blocking::Client,
    url: String,
    api_key: Option<String>,
    max_attempts: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

impl HttpEndpoint {
    pub fn new(cfg: &EndpointConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| Error::AgentConfig(format!("http client: {e}")))?;
        Ok(HttpEndpoint {
            client,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            api_key: std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty()),
            max_attempts: cfg.max_attempts.max(1),
        })
    }

    fn attempt(&self, request: &ChatRequest) -> std::result::Result<String, (bool, String)> {
        let mut builder = self.client.post(&self.url).json(request);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| (true, e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let retriable = status.as_u16() == 429 || status.is_server_error();
            let body = response.text().unwrap_or_default();
            return Err((retriable, format!("HTTP {status}: {}", truncate(&body, 300))));
        }
        let parsed: CompletionResponse = response.json().map_err(|e| (false, format!("bad response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| (false, "response has no choices[0].message.content".to_string()))
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

impl ChatEndpoint for HttpEndpoint {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, AgentError> {
        let mut delay = Duration::from_millis(500);
        let mut last = String::new();
        for attempt in 1..=self.max_attempts {
            match self.attempt(request) {
                Ok(content) => return Ok(content),
                Err((retriable, message)) => {
                    tracing::warn!(attempt, %message, "chat completion failed");
                    last = message;
                    if !retriable || attempt == self.max_attempts {
                        break;
                    }
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
        Err(AgentError::Transport(last))
    }
}

/// One fixture line. `key` pins the completion to a request fingerprint;
/// lines without a key are served in file order to unmatched requests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub content: String,
}

/// Replays recorded completions from a JSON Lines fixture.
#[derive(Debug, Clone)]
pub struct ReplayEndpoint {
    keyed: Arc<HashMap<String, String>>,
    script: Arc<Vec<String>>,
    cursor: usize,
}

impl ReplayEndpoint {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ReplayEntry = serde_json::from_str(line).map_err(|e| Error::LogFormat {
                line: i + 1,
                message: format!("replay fixture {}: {e}", path.display()),
            })?;
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ReplayEntry>) -> Self {
        let mut keyed = HashMap::new();
        let mut script = Vec::new();
        for e in entries {
            match e.key {
                Some(k) => {
                    keyed.insert(k, e.content);
                }
                None => script.push(e.content),
            }
        }
        ReplayEndpoint {
            keyed: Arc::new(keyed),
            script: Arc::new(script),
            cursor: 0,
        }
    }

    /// Serves `responses` in order regardless of the request.
    pub fn scripted<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self::from_entries(responses.into_iter().map(|c| ReplayEntry {
            key: None,
            content: c.into(),
        }))
    }
}

impl ChatEndpoint for ReplayEndpoint {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, AgentError> {
        if let Some(content) = self.keyed.get(&request.fingerprint()) {
            return Ok(content.clone());
        }
        let content = self
            .script
            .get(self.cursor)
            .cloned()
            .ok_or_else(|| AgentError::Transport("replay fixture has no completion for this request".into()))?;
        self.cursor += 1;
        Ok(content)
    }
}

struct RecordingEndpoint {
    inner: Box<dyn ChatEndpoint>,
    path: PathBuf,
}

impl ChatEndpoint for RecordingEndpoint {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, AgentError> {
        let content = self.inner.complete(request)?;
        let entry = ReplayEntry {
            key: Some(request.fingerprint()),
            content: content.clone(),
        };
        let mut line = serde_json::to_string(&entry).expect("entry serializes");
        line.push('\n');
        let written = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .and_then(|mut f| f.write_all(line.as_bytes()));
        if let Err(e) = written {
            tracing::warn!(path = %self.path.display(), error = %e, "could not record completion");
        }
        Ok(content)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(text: &str) -> ChatRequest {
        ChatRequest {
            model: "m".into(),
            messages: vec![ChatMessage::user(text)],
            temperature: 0.0,
            seed: None,
        }
    }

    #[test]
    fn keyed_entries_win_over_script() {
        let a = request("a");
        let mut ep = ReplayEndpoint::from_entries([
            ReplayEntry {
                key: Some(a.fingerprint()),
                content: "for a".into(),
            },
            ReplayEntry {
                key: None,
                content: "first".into(),
            },
        ]);
        assert_eq!(ep.complete(&a).unwrap(), "for a");
        assert_eq!(ep.complete(&a).unwrap(), "for a");
        assert_eq!(ep.complete(&request("b")).unwrap(), "first");
        assert!(ep.complete(&request("b")).is_err());
    }

    #[test]
    fn fingerprint_ignores_seed() {
        let mut a = request("x");
        let b = a.clone();
        a.seed = Some(9);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), request("y").fingerprint());
    }

    #[test]
    fn loads_fixture_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fx.jsonl");
        std::fs::write(&path, "{\"content\":\"one\"}\n\n{\"content\":\"two\"}\n").unwrap();
        let mut ep = ReplayEndpoint::load(&path).unwrap();
        assert_eq!(ep.complete(&request("q")).unwrap(), "one");
        assert_eq!(ep.complete(&request("q")).unwrap(), "two");
    }

    #[test]
    fn unreachable_server_is_transport_error() {
        let cfg = EndpointConfig {
            base_url: "http://127.0.0.1:9".into(),
            max_attempts: 1,
            timeout: Duration::from_secs(2),
            ..EndpointConfig::default()
        };
        let mut ep = HttpEndpoint::new(&cfg).unwrap();
        assert!(matches!(ep.complete(&request("q")), Err(AgentError::Transport(_))));
    }
}
