//! Single chokepoint for model access.
//!
//! Every model call goes through [`Gateway::complete`], which owns tier
//! routing, the bounded memory window and the record/replay fixture store.

mod ask;
mod fixtures;
mod openai;

pub use ask::{ask_json, Reply, REASK_PROMPT};
pub use fixtures::{FixtureEntry, FixtureStore};
pub use openai::{OpenAiConfig, OpenAiProvider};

use crate::error::{Error, Result};
use crate::prompt::{render_prompt, ContextBundle, TemplateId};
use chrono::Utc;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Transcript turns (excluding the system prompt) sent with each request.
pub const MEMORY_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTier {
    Main,
    Summarizer,
}

impl ModelTier {
    pub fn temperature(self) -> f64 {
        match self {
            ModelTier::Main => 0.7,
            ModelTier::Summarizer => 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

impl Turn {
    fn new(role: Role, text: impl Into<String>) -> Self {
        Self { role, text: text.into() }
    }
}

/// Per-project conversation memory. The first turn is always the system
/// prompt and turns are only ever appended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChatSession {
    pub project_id: String,
    transcript: Vec<Turn>,
}

impl ChatSession {
    pub fn new(project_id: impl Into<String>) -> Self {
        Self {
            project_id: project_id.into(),
            transcript: vec![Turn::new(Role::System, TemplateId::System.body())],
        }
    }

    pub fn transcript(&self) -> &[Turn] {
        &self.transcript
    }

    /// System prompt plus the most recent [`MEMORY_WINDOW`] turns.
    pub fn window(&self) -> Vec<Turn> {
        let rest = &self.transcript[1..];
        let skip = rest.len().saturating_sub(MEMORY_WINDOW);
        std::iter::once(self.transcript[0].clone())
            .chain(rest[skip..].iter().cloned())
            .collect()
    }

    fn record(&mut self, prompt: &str, response: &str) {
        self.transcript.push(Turn::new(Role::User, prompt));
        self.transcript.push(Turn::new(Role::Assistant, response));
    }
}

pub fn new_session(project_id: &str) -> ChatSession {
    ChatSession::new(project_id)
}

/// A chat-completion request as handed to a provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub tier: ModelTier,
    pub temperature: f64,
    /// Memory window followed by the new user prompt.
    pub messages: Vec<Turn>,
}

impl ChatRequest {
    pub fn prompt(&self) -> &str {
        self.messages.last().map(|t| t.text.as_str()).unwrap_or_default()
    }
}

/// Text-in, text-out model backend.
pub trait ChatProvider: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    Live,
    Record,
    Replay,
}

impl FromStr for GatewayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Ok(GatewayMode::Live),
            "record" => Ok(GatewayMode::Record),
            "replay" => Ok(GatewayMode::Replay),
            other => Err(Error::InvalidRequest(format!("unknown gateway mode {other:?}"))),
        }
    }
}

impl fmt::Display for GatewayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GatewayMode::Live => "live",
            GatewayMode::Record => "record",
            GatewayMode::Replay => "replay",
        })
    }
}

/// Where a completion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Provider,
    Fixture,
}

/// One observed gateway call, kept for inspection in tests and logs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CallRecord {
    pub template: Option<TemplateId>,
    pub tier: ModelTier,
    pub digest: String,
    pub source: Source,
}

#[derive(Serialize)]
struct DigestInput<'a> {
    tier: ModelTier,
    prompt: &'a str,
    window: &'a [Turn],
}

/// Hex SHA-256 over a canonical serialization of tier, prompt and window.
pub fn request_digest(tier: ModelTier, prompt: &str, window: &[Turn]) -> String {
    let canonical = serde_json::to_string(&DigestInput { tier, prompt, window }).expect("digest input serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub struct Gateway {
    mode: GatewayMode,
    provider: Option<Arc<dyn ChatProvider>>,
    fixtures: Arc<FixtureStore>,
    calls: Mutex<Vec<CallRecord>>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("mode", &self.mode)
            .field("fixtures", &self.fixtures.len())
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn live(provider: Arc<dyn ChatProvider>) -> Self {
        Self::new(GatewayMode::Live, Some(provider), Arc::new(FixtureStore::in_memory()))
    }

    pub fn record(provider: Arc<dyn ChatProvider>, fixtures: Arc<FixtureStore>) -> Self {
        Self::new(GatewayMode::Record, Some(provider), fixtures)
    }

    pub fn replay(fixtures: Arc<FixtureStore>) -> Self {
        Self::new(GatewayMode::Replay, None, fixtures)
    }

    /// Replay mode ignores `provider` entirely.
    pub fn new(mode: GatewayMode, provider: Option<Arc<dyn ChatProvider>>, fixtures: Arc<FixtureStore>) -> Self {
        let provider = if mode == GatewayMode::Replay { None } else { provider };
        Self {
            mode,
            provider,
            fixtures,
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn mode(&self) -> GatewayMode {
        self.mode
    }

    pub fn fixtures(&self) -> &Arc<FixtureStore> {
        &self.fixtures
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.calls.lock().clone()
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().len()
    }

    /// Sends `prompt` with the session's memory window and appends the
    /// exchange to the transcript.
    pub fn complete(&self, session: &mut ChatSession, prompt: &str, tier: ModelTier) -> Result<String> {
        self.complete_inner(session, prompt, tier, None)
    }

    /// Renders `template` and completes it on the template's tier.
    pub fn complete_template(
        &self,
        session: &mut ChatSession,
        template: TemplateId,
        bundle: &ContextBundle,
    ) -> Result<String> {
        let prompt = render_prompt(template, bundle)?;
        self.complete_inner(session, &prompt, template.tier(), Some(template))
    }

    fn complete_inner(
        &self,
        session: &mut ChatSession,
        prompt: &str,
        tier: ModelTier,
        template: Option<TemplateId>,
    ) -> Result<String> {
        if prompt.trim().is_empty() {
            return Err(Error::EmptyPrompt);
        }
        let window = session.window();
        let digest = request_digest(tier, prompt, &window);
        let (response, source) = match self.mode {
            GatewayMode::Replay => {
                let entry = self.fixtures.get(&digest).ok_or_else(|| Error::FixtureMiss(digest.clone()))?;
                (entry.response, Source::Fixture)
            }
            GatewayMode::Live | GatewayMode::Record => {
                let provider = self
                    .provider
                    .as_ref()
                    .ok_or_else(|| Error::ProviderError("no model provider configured".into()))?;
                let mut messages = window;
                messages.push(Turn::new(Role::User, prompt));
                let request = ChatRequest {
                    tier,
                    temperature: tier.temperature(),
                    messages,
                };
                let response = provider.chat(&request)?;
                if self.mode == GatewayMode::Record {
                    self.fixtures.put(FixtureEntry {
                        digest: digest.clone(),
                        tier,
                        prompt: prompt.to_string(),
                        response: response.clone(),
                        recorded_at: Utc::now().to_rfc3339(),
                    })?;
                }
                (response, Source::Provider)
            }
        };
        tracing::debug!(?tier, ?template, %digest, ?source, "model call");
        self.calls.lock().push(CallRecord {
            template,
            tier,
            digest,
            source,
        });
        session.record(prompt, &response);
        Ok(response)
    }
}
