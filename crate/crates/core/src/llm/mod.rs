//! Provider-agnostic chat completion and embedding access.
//!
//! Every prompt goes through a [`PromptRequest`]: a registered template plus
//! the values of its `{placeholder}`s. The [`Gateway`] validates and renders
//! the request, bounds the number of in-flight provider calls, and memoizes
//! embeddings. Two providers ship with the crate: [`LiveProvider`] talks to an
//! OpenAI-compatible HTTP API and [`ScriptedProvider`] replays fixture files
//! for offline, byte-reproducible runs.

mod live;
mod scripted;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::model::Vector;

pub use live::{LiveProvider, RetryPolicy};
pub use scripted::{fixture_key, scripted_embedding, RecordingProvider, ScriptedProvider, SCRIPTED_EMBED_DIM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("no fixture for template `{template}` (key {key})")]
    FixtureMissing { template: TemplateId, key: String },
    #[error("provider error after {attempts} attempt(s): {message}")]
    Provider {
        message: String,
        attempts: u32,
        status: Option<u16>,
        retry_after: Option<Duration>,
    },
    #[error("placeholder `{0}` is not bound")]
    UnboundPlaceholder(String),
    #[error("temperature {0} outside [0, 2]")]
    InvalidTemperature(f64),
    #[error("embed requires at least one input text")]
    EmptyInput,
    #[error("configuration error: {0}")]
    Config(String),
}

impl LlmError {
    pub fn provider(message: impl Into<String>) -> Self {
        LlmError::Provider {
            message: message.into(),
            attempts: 1,
            status: None,
            retry_after: None,
        }
    }
}

/// The registered prompt templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    IdentifyFields,
    EqGeneration,
    EqGenerationNoPersona,
    EqGenerationNoSimplification,
    EqFromPaper,
    EqDedupe,
    PseudoAnswers,
    QueryTerms,
    SearchQueries,
    ClusterRelevance,
    ClusterDivisible,
    ThemeTitle,
}

impl TemplateId {
    pub const ALL: [TemplateId; 12] = [
        TemplateId::IdentifyFields,
        TemplateId::EqGeneration,
        TemplateId::EqGenerationNoPersona,
        TemplateId::EqGenerationNoSimplification,
        TemplateId::EqFromPaper,
        TemplateId::EqDedupe,
        TemplateId::PseudoAnswers,
        TemplateId::QueryTerms,
        TemplateId::SearchQueries,
        TemplateId::ClusterRelevance,
        TemplateId::ClusterDivisible,
        TemplateId::ThemeTitle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::IdentifyFields => "identify_fields",
            TemplateId::EqGeneration => "eq_generation",
            TemplateId::EqGenerationNoPersona => "eq_generation_no_persona",
            TemplateId::EqGenerationNoSimplification => "eq_generation_no_simplification",
            TemplateId::EqFromPaper => "eq_from_paper",
            TemplateId::EqDedupe => "eq_dedupe",
            TemplateId::PseudoAnswers => "pseudo_answers",
            TemplateId::QueryTerms => "query_terms",
            TemplateId::SearchQueries => "search_queries",
            TemplateId::ClusterRelevance => "cluster_relevance",
            TemplateId::ClusterDivisible => "cluster_divisible",
            TemplateId::ThemeTitle => "theme_title",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            TemplateId::IdentifyFields => include_str!("../../templates/identify_fields.txt"),
            TemplateId::EqGeneration => include_str!("../../templates/eq_generation.txt"),
            TemplateId::EqGenerationNoPersona => {
                include_str!("../../templates/eq_generation_no_persona.txt")
            }
            TemplateId::EqGenerationNoSimplification => {
                include_str!("../../templates/eq_generation_no_simplification.txt")
            }
            TemplateId::EqFromPaper => include_str!("../../templates/eq_from_paper.txt"),
            TemplateId::EqDedupe => include_str!("../../templates/eq_dedupe.txt"),
            TemplateId::PseudoAnswers => include_str!("../../templates/pseudo_answers.txt"),
            TemplateId::QueryTerms => include_str!("../../templates/query_terms.txt"),
            TemplateId::SearchQueries => include_str!("../../templates/search_queries.txt"),
            TemplateId::ClusterRelevance => include_str!("../../templates/cluster_relevance.txt"),
            TemplateId::ClusterDivisible => include_str!("../../templates/cluster_divisible.txt"),
            TemplateId::ThemeTitle => include_str!("../../templates/theme_title.txt"),
        }
    }

    /// Generation prompts sample at 0.7; yes/no curation judgments are greedy.
    pub fn default_temperature(self) -> f64 {
        match self {
            TemplateId::ClusterRelevance | TemplateId::ClusterDivisible | TemplateId::EqDedupe => {
                0.0
            }
            _ => 0.7,
        }
    }

    /// Placeholder names used by the template, in order of first use.
    pub fn placeholders(self) -> Vec<&'static str> {
        let mut names = Vec::new();
        let text = self.template();
        let mut rest = text;
        while let Some(open) = rest.find('{') {
            let after = &rest[open + 1..];
            match after.find('}') {
                Some(close) => {
                    let name = &after[..close];
                    if is_placeholder_name(name) && !names.contains(&name) {
                        names.push(name);
                    }
                    rest = &after[close + 1..];
                }
                None => break,
            }
        }
        names
    }
}

fn is_placeholder_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c == '_')
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = LlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| LlmError::Config(format!("unknown template `{s}`")))
    }
}

/// A template invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub template_id: TemplateId,
    pub variables: BTreeMap<String, String>,
    pub temperature: f64,
}

impl PromptRequest {
    pub fn new(template_id: TemplateId) -> Self {
        PromptRequest {
            template_id,
            variables: BTreeMap::new(),
            temperature: template_id.default_temperature(),
        }
    }

    pub fn var(mut self, name: &str, value: impl Into<String>) -> Self {
        self.variables.insert(name.to_string(), value.into());
        self
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidTemperature(self.temperature));
        }
        for name in self.template_id.placeholders() {
            if !self.variables.contains_key(name) {
                return Err(LlmError::UnboundPlaceholder(name.to_string()));
            }
        }
        Ok(())
    }

    /// Substitutes every placeholder of the template.
    pub fn render(&self) -> Result<String, LlmError> {
        self.validate()?;
        let template = self.template_id.template();
        let mut out = String::with_capacity(template.len() + 256);
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            match after.find('}') {
                Some(close) if is_placeholder_name(&after[..close]) => {
                    out.push_str(&self.variables[&after[..close]]);
                    rest = &after[close + 1..];
                }
                _ => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }

    /// SHA-256 over the template id and the sorted variables.
    pub fn fixture_key(&self) -> String {
        fixture_key(self.template_id, &self.variables)
    }
}

/// A backend able to answer rendered prompts and embed text.
#[async_trait]
pub trait LlmProvider: Send + Sync {
    async fn complete(&self, request: &PromptRequest, rendered: &str) -> Result<String, LlmError>;

    async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    Live,
    Scripted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    pub model_name: String,
    pub embed_model_name: String,
    pub fixture_dir: Option<PathBuf>,
    pub base_url: String,
    pub api_key: Option<String>,
    pub max_parallel: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            mode: ProviderMode::Live,
            model_name: "gpt-4".into(),
            embed_model_name: "text-embedding-3-small".into(),
            fixture_dir: None,
            base_url: "https://api.openai.com/v1".into(),
            api_key: None,
            max_parallel: 4,
        }
    }
}

impl ProviderConfig {
    pub fn scripted(fixture_dir: impl Into<PathBuf>) -> Self {
        ProviderConfig {
            mode: ProviderMode::Scripted,
            fixture_dir: Some(fixture_dir.into()),
            ..Default::default()
        }
    }

    /// Reads `LLM_MODE`, `LLM_API_KEY`, `LLM_BASE_URL`, `LLM_MODEL`,
    /// `EMBED_MODEL`, `FIXTURE_DIR` and `LLM_MAX_PARALLEL`.
    pub fn from_env() -> Result<Self, LlmError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, LlmError> {
        let mut cfg = ProviderConfig::default();
        if let Some(mode) = get("LLM_MODE") {
            cfg.mode = match mode.to_ascii_lowercase().as_str() {
                "live" => ProviderMode::Live,
                "scripted" => ProviderMode::Scripted,
                other => return Err(LlmError::Config(format!("unknown LLM_MODE `{other}`"))),
            };
        }
        if let Some(v) = get("LLM_MODEL") {
            cfg.model_name = v;
        }
        if let Some(v) = get("EMBED_MODEL") {
            cfg.embed_model_name = v;
        }
        if let Some(v) = get("LLM_BASE_URL") {
            cfg.base_url = v;
        }
        cfg.api_key = get("LLM_API_KEY");
        cfg.fixture_dir = get("FIXTURE_DIR").map(PathBuf::from);
        if let Some(v) = get("LLM_MAX_PARALLEL") {
            cfg.max_parallel = v
                .parse()
                .ok()
                .filter(|&n: &usize| n > 0)
                .ok_or_else(|| LlmError::Config(format!("invalid LLM_MAX_PARALLEL `{v}`")))?;
        }
        Ok(cfg)
    }
}

/// Shared entry point for every LLM call.
#[derive(Clone)]
pub struct Gateway {
    provider: Arc<dyn LlmProvider>,
    admission: Arc<Semaphore>,
    embed_memo: Arc<Mutex<HashMap<String, Vector>>>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("available_permits", &self.admission.available_permits())
            .finish()
    }
}

impl Gateway {
    pub fn new(provider: Arc<dyn LlmProvider>, max_parallel: usize) -> Self {
        Gateway {
            provider,
            admission: Arc::new(Semaphore::new(max_parallel.max(1))),
            embed_memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn from_config(config: &ProviderConfig) -> Result<Self, LlmError> {
        let provider: Arc<dyn LlmProvider> = match config.mode {
            ProviderMode::Scripted => {
                let dir = config.fixture_dir.clone().ok_or_else(|| {
                    LlmError::Config("scripted mode requires FIXTURE_DIR".into())
                })?;
                Arc::new(ScriptedProvider::open(dir)?)
            }
            ProviderMode::Live => Arc::new(LiveProvider::new(config)?),
        };
        Ok(Gateway::new(provider, config.max_parallel))
    }

    pub async fn complete(&self, request: &PromptRequest) -> Result<String, LlmError> {
        let rendered = request.render()?;
        let _permit = self
            .admission
            .acquire()
            .await
            .map_err(|_| LlmError::provider("gateway closed"))?;
        tracing::debug!(template = %request.template_id, "completion");
        self.provider.complete(request, &rendered).await
    }

    /// Embeds `texts`, preserving order and cardinality. Repeated texts are
    /// served from an in-process memo and the remaining ones go to the
    /// provider as one batch.
    pub async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError> {
        if texts.is_empty() {
            return Err(LlmError::EmptyInput);
        }
        let missing: Vec<String> = {
            let memo = self.embed_memo.lock().expect("embed memo poisoned");
            let mut seen = std::collections::HashSet::new();
            texts
                .iter()
                .filter(|t| !memo.contains_key(*t) && seen.insert(t.as_str()))
                .cloned()
                .collect()
        };
        if !missing.is_empty() {
            let vectors = {
                let _permit = self
                    .admission
                    .acquire()
                    .await
                    .map_err(|_| LlmError::provider("gateway closed"))?;
                self.provider.embed(&missing).await?
            };
            if vectors.len() != missing.len() {
                return Err(LlmError::provider(format!(
                    "provider returned {} embeddings for {} inputs",
                    vectors.len(),
                    missing.len()
                )));
            }
            let mut memo = self.embed_memo.lock().expect("embed memo poisoned");
            for (text, v) in missing.into_iter().zip(vectors) {
                memo.insert(text, v);
            }
        }
        let memo = self.embed_memo.lock().expect("embed memo poisoned");
        Ok(texts.iter().map(|t| memo[t].clone()).collect())
    }

    pub async fn embed_one(&self, text: &str) -> Result<Vector, LlmError> {
        Ok(self.embed(&[text.to_string()]).await?.remove(0))
    }
}
