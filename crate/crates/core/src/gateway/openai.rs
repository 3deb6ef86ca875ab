use super::{ChatProvider, ChatRequest, ModelTier};
use crate::error::{Error, Result};
use crate::transport::{HttpRequest, HttpTransport, RetryPolicy};
use serde_json::{json, Value};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct OpenAiConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub main_model: String,
    pub summarizer_model: String,
}

impl OpenAiConfig {
    /// Reads `LLM_BASE_URL`, `LLM_API_KEY`, `LLM_MAIN_MODEL` and
    /// `LLM_SUMMARIZER_MODEL`.
    pub fn from_env() -> Self {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.trim().is_empty());
        Self {
            base_url: var("LLM_BASE_URL").unwrap_or_else(|| "https://api.openai.com/v1".into()),
            api_key: var("LLM_API_KEY"),
            main_model: var("LLM_MAIN_MODEL").unwrap_or_else(|| "gpt-4o".into()),
            summarizer_model: var("LLM_SUMMARIZER_MODEL").unwrap_or_else(|| "gpt-4o-mini".into()),
        }
    }

    pub fn model(&self, tier: ModelTier) -> &str {
        match tier {
            ModelTier::Main => &self.main_model,
            ModelTier::Summarizer => &self.summarizer_model,
        }
    }
}

/// Chat-completions client for any OpenAI-compatible endpoint.
pub struct OpenAiProvider {
    config: OpenAiConfig,
    transport: Arc<dyn HttpTransport>,
    retry: RetryPolicy,
}

impl OpenAiProvider {
    pub fn new(config: OpenAiConfig, transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            config,
            transport,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|t| json!({ "role": t.role, "content": t.text }))
            .collect();
        json!({
            "model": self.config.model(request.tier),
            "temperature": request.temperature,
            "messages": messages,
        })
    }
}

impl ChatProvider for OpenAiProvider {
    fn chat(&self, request: &ChatRequest) -> Result<String> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut http = HttpRequest::post_json(url, &self.body(request));
        if let Some(key) = &self.config.api_key {
            http = http.header("authorization", format!("Bearer {key}"));
        }
        let response = self.retry.execute(self.transport.as_ref(), &http).map_err(|e| match e {
            Error::ProviderUnavailable(msg) => Error::ProviderError(msg),
            other => other,
        })?;
        let value: Value = serde_json::from_slice(&response.body)
            .map_err(|e| Error::ProviderError(format!("completion body is not JSON: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::ProviderError("completion has no message content".into()))
    }
}
