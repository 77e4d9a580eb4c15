//! Producing candidate code from prompts.

mod remote;

use std::collections::{BTreeMap, VecDeque};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use remote::RemoteSynthesizer;

use crate::candidate_runtime::{CandidateSource, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Prompt {
    pub messages: Vec<Message>,
}

impl Prompt {
    pub fn new() -> Self {
        Prompt::default()
    }

    pub fn system(mut self, content: impl Into<String>) -> Self {
        self.messages.push(Message { role: Role::System, content: content.into() });
        self
    }

    pub fn user(mut self, content: impl Into<String>) -> Self {
        self.messages.push(Message { role: Role::User, content: content.into() });
        self
    }

    /// Total characters across all messages.
    pub fn rendered_size(&self) -> usize {
        self.messages.iter().map(|m| m.content.chars().count()).sum()
    }

    /// All message contents joined, for searching.
    pub fn text(&self) -> String {
        self.messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template slot `{0}` has no value")]
    MissingSlot(String),
    #[error("unterminated slot starting at byte {0}")]
    Unterminated(usize),
}

/// Replaces every `{{name}}` in `template` with `slots[name]`. Slot values
/// are inserted verbatim and never re-scanned.
pub fn render(template: &str, slots: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    let mut offset = 0;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or(TemplateError::Unterminated(offset + start))?;
        let name = after[..end].trim();
        let value = slots.get(name).ok_or_else(|| TemplateError::MissingSlot(name.to_string()))?;
        out.push_str(value);
        let consumed = start + 2 + end + 2;
        offset += consumed;
        rest = &rest[consumed..];
    }
    out.push_str(rest);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("scripted synthesizer has no responses left")]
    ScriptExhausted,
    #[error("transport error{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    TransportError { status: Option<u16>, message: String },
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("model returned no usable content: {0}")]
    ModelRefusal(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("response contains no fenced code block")]
    NoCodeBlock,
}

/// Something that answers prompts with text.
pub trait Synthesizer {
    fn complete(&mut self, prompt: &Prompt) -> Result<String, SynthError>;
}

impl<S: Synthesizer + ?Sized> Synthesizer for &mut S {
    fn complete(&mut self, prompt: &Prompt) -> Result<String, SynthError> {
        (**self).complete(prompt)
    }
}

/// Replays a fixed list of responses in order.
#[derive(Debug, Clone, Default)]
pub struct MockSynthesizer {
    script: VecDeque<String>,
    calls: usize,
    prompts: Vec<Prompt>,
}

impl MockSynthesizer {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MockSynthesizer { script: responses.into_iter().map(Into::into).collect(), calls: 0, prompts: Vec::new() }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Every prompt received so far.
    pub fn prompts(&self) -> &[Prompt] {
        &self.prompts
    }
}

impl Synthesizer for MockSynthesizer {
    fn complete(&mut self, prompt: &Prompt) -> Result<String, SynthError> {
        self.calls += 1;
        self.prompts.push(prompt.clone());
        self.script.pop_front().ok_or(SynthError::ScriptExhausted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizerConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Extra request fields such as temperature, passed through unchanged.
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

fn default_key_env() -> String {
    "DHSYNTH_API_KEY".into()
}
fn default_timeout_secs() -> u64 {
    600
}
fn default_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    1000
}

/// The last fenced code block in `response`. The fence's info string, if
/// any, becomes the language tag.
pub fn extract_candidate(response: &str, origin: Origin) -> Result<CandidateSource, SynthError> {
    let mut last: Option<(String, String)> = None;
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in response.lines() {
        let trimmed = line.trim_start();
        match &mut open {
            None => {
                if let Some(info) = trimmed.strip_prefix("```") {
                    open = Some((info.trim().to_string(), Vec::new()));
                }
            }
            Some((lang, body)) => {
                if trimmed.trim_end() == "```" {
                    let mut code = body.join("\n");
                    code.push('\n');
                    last = Some((std::mem::take(lang), code));
                    open = None;
                } else {
                    body.push(line);
                }
            }
        }
    }
    let (lang, code) = last.ok_or(SynthError::NoCodeBlock)?;
    let lang = if lang.is_empty() { "python".to_string() } else { lang };
    CandidateSource::new(lang, code, origin).map_err(|_| SynthError::NoCodeBlock)
}
