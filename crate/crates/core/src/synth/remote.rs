use std::fmt;
use std::thread::sleep;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{Prompt, SynthError, Synthesizer, SynthesizerConfig};

/// Client for a chat-completions style HTTP endpoint.
pub struct RemoteSynthesizer {
    config: SynthesizerConfig,
    api_key: String,
    client: Client,
}

// never print the key
impl fmt::Debug for RemoteSynthesizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteSynthesizer")
            .field("endpoint", &self.config.endpoint)
            .field("model", &self.config.model)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

enum Attempt {
    Done(String),
    Retry(SynthError, Option<Duration>),
    Fatal(SynthError),
}

impl RemoteSynthesizer {
    /// Reads the key from the configured environment variable.
    pub fn from_env(config: SynthesizerConfig) -> Result<Self, SynthError> {
        let key = std::env::var(&config.api_key_env).map_err(|_| SynthError::MissingApiKey(config.api_key_env.clone()))?;
        Self::with_key(config, key)
    }

    pub fn with_key(config: SynthesizerConfig, api_key: String) -> Result<Self, SynthError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| SynthError::TransportError { status: None, message: e.to_string() })?;
        Ok(RemoteSynthesizer { config, api_key, client })
    }

    fn body(&self, prompt: &Prompt) -> Value {
        let mut body = self.config.params.clone();
        body.insert("model".into(), json!(self.config.model));
        body.insert("messages".into(), json!(prompt.messages));
        Value::Object(body)
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let response = match self.client.post(&self.config.endpoint).bearer_auth(&self.api_key).json(body).send() {
            Ok(r) => r,
            Err(e) => {
                let err = SynthError::TransportError { status: None, message: self.scrub(&e.to_string()) };
                return Attempt::Retry(err, None);
            }
        };
        let status = response.status();
        if status == StatusCode::TOO_MANY_REQUESTS {
            let retry_after = response
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Attempt::Retry(SynthError::RateLimited { retry_after }, retry_after);
        }
        let text = response.text().unwrap_or_default();
        if !status.is_success() {
            let err = SynthError::TransportError { status: Some(status.as_u16()), message: self.scrub(&snippet(&text)) };
            return if status.is_server_error() { Attempt::Retry(err, None) } else { Attempt::Fatal(err) };
        }
        let parsed: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                return Attempt::Fatal(SynthError::TransportError {
                    status: Some(status.as_u16()),
                    message: format!("unreadable response body: {e}"),
                })
            }
        };
        let choice = &parsed["choices"][0];
        match choice["message"]["content"].as_str() {
            Some(content) if !content.trim().is_empty() => Attempt::Done(content.to_string()),
            _ => {
                let reason = choice["finish_reason"].as_str().unwrap_or("empty response").to_string();
                Attempt::Fatal(SynthError::ModelRefusal(reason))
            }
        }
    }

    fn scrub(&self, text: &str) -> String {
        if self.api_key.is_empty() {
            text.to_string()
        } else {
            text.replace(&self.api_key, "<redacted>")
        }
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(500).collect()
}

impl Synthesizer for RemoteSynthesizer {
    fn complete(&mut self, prompt: &Prompt) -> Result<String, SynthError> {
        let body = self.body(prompt);
        log::info!("requesting completion from {} ({} prompt chars)", self.config.model, prompt.rendered_size());
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e, wait) => {
                    if tries >= self.config.max_retries {
                        return Err(e);
                    }
                    let backoff = Duration::from_millis(self.config.backoff_ms.saturating_mul(1 << tries.min(16)));
                    log::warn!("completion attempt {} failed: {e}; retrying", tries + 1);
                    sleep(wait.unwrap_or(backoff));
                    tries += 1;
                }
            }
        }
    }
}
