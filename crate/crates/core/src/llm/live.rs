//! OpenAI-compatible HTTP provider.

use std::time::Duration;

use async_trait::async_trait;
use reqwest::StatusCode;
use serde::Deserialize;
use serde_json::json;

use super::{LlmError, LlmProvider, PromptRequest, ProviderConfig};
use crate::model::Vector;

const EMBED_BATCH: usize = 256;

/// Bounded retries with exponential backoff for transient failures
/// (connection errors, 429 and 5xx responses).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt.saturating_sub(1))
    }
}

pub struct LiveProvider {
    client: reqwest::Client,
    base_url: String,
    api_key: Option<String>,
    model: String,
    embed_model: String,
    retry: RetryPolicy,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f64>,
}

enum Attempt {
    Retry(LlmError),
    Fatal(LlmError),
}

impl LiveProvider {
    pub fn new(config: &ProviderConfig) -> Result<Self, LlmError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| LlmError::Config(format!("http client: {e}")))?;
        Ok(LiveProvider {
            client,
            base_url: config.base_url.trim_end_matches('/').to_string(),
            api_key: config.api_key.clone(),
            model: config.model_name.clone(),
            embed_model: config.embed_model_name.clone(),
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    async fn post_once<T: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: &serde_json::Value,
    ) -> Result<T, Attempt> {
        let mut req = self
            .client
            .post(format!("{}{}", self.base_url, path))
            .json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send().await {
            Ok(r) => r,
            Err(e) => return Err(Attempt::Retry(LlmError::provider(format!("request failed: {e}")))),
        };
        let status = resp.status();
        if status.is_success() {
            return resp.json::<T>().await.map_err(|e| {
                Attempt::Fatal(LlmError::provider(format!("malformed response: {e}")))
            });
        }
        let retry_after = resp
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = resp.text().await.unwrap_or_default();
        let err = LlmError::Provider {
            message: format!("HTTP {status}: {}", text.chars().take(200).collect::<String>()),
            attempts: 1,
            status: Some(status.as_u16()),
            retry_after,
        };
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            Err(Attempt::Retry(err))
        } else {
            Err(Attempt::Fatal(err))
        }
    }

    async fn post<T: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: serde_json::Value,
    ) -> Result<T, LlmError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.post_once(path, &body).await {
                Ok(v) => return Ok(v),
                Err(Attempt::Fatal(e)) => return Err(with_attempts(e, attempt)),
                Err(Attempt::Retry(e)) => {
                    if attempt >= self.retry.max_attempts {
                        return Err(with_attempts(e, attempt));
                    }
                    let wait = match &e {
                        LlmError::Provider { retry_after: Some(d), .. } => {
                            (*d).max(self.retry.delay(attempt))
                        }
                        _ => self.retry.delay(attempt),
                    };
                    tracing::warn!(path, attempt, ?wait, error = %e, "retrying provider call");
                    tokio::time::sleep(wait).await;
                }
            }
        }
    }
}

fn with_attempts(e: LlmError, n: u32) -> LlmError {
    match e {
        LlmError::Provider { message, status, retry_after, .. } => LlmError::Provider {
            message,
            attempts: n,
            status,
            retry_after,
        },
        other => other,
    }
}

#[async_trait]
impl LlmProvider for LiveProvider {
    async fn complete(&self, request: &PromptRequest, rendered: &str) -> Result<String, LlmError> {
        let body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": rendered }],
            "temperature": request.temperature,
        });
        let resp: ChatResponse = self.post("/chat/completions", body).await?;
        resp.choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmError::provider("completion response has no content"))
    }

    async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(EMBED_BATCH) {
            let body = json!({ "model": self.embed_model, "input": batch });
            let mut resp: EmbeddingResponse = self.post("/embeddings", body).await?;
            if resp.data.len() != batch.len() {
                return Err(LlmError::provider(format!(
                    "expected {} embeddings, got {}",
                    batch.len(),
                    resp.data.len()
                )));
            }
            resp.data.sort_by_key(|d| d.index);
            out.extend(resp.data.into_iter().map(|d| Vector(d.embedding)));
        }
        Ok(out)
    }
}
