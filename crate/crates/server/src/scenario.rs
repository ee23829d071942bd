//! Rule-driven completions used to author the scripted fixture set.
//!
//! A script lists rules; the first rule whose template matches and whose
//! every `match` entry is a substring of the named variable supplies the
//! completion. Running a script through [`record`] writes one fixture per
//! distinct prompt, which the scripted provider later replays.

use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use async_trait::async_trait;
use serde::Deserialize;

use coexplore_core::eq::{eqs_from_paper, generate_topic_eqs, EqIdAllocator, DEFAULT_NUM_RQ};
use coexplore_core::llm::{
    scripted_embedding, Gateway, LlmError, LlmProvider, PromptRequest, RecordingProvider, TemplateId,
};
use coexplore_core::model::{normalize_topic, EqOrigin, ExploratoryQuestion, PaperRecord, Vector};
use coexplore_core::query::expand_queries;
use coexplore_core::scholar::{Corpus, ScholarClient};

use crate::config::AppConfig;
use crate::export::ExportFormat;
use crate::services::Services;

#[derive(Debug, Clone, Deserialize)]
pub struct Rule {
    pub template: TemplateId,
    #[serde(default, rename = "match")]
    pub matches: std::collections::BTreeMap<String, String>,
    pub response: String,
}

/// Extra pipeline runs recorded beside the headless scenario.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Run {
    TopicEqs { topic: String, max_fields: usize },
    Expand { topic: String, question: String, discipline: String },
    PaperEqs { topic: String, paper_id: String, #[serde(default)] keywords: Vec<String> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct Script {
    pub topic: String,
    pub max_fields: usize,
    pub rules: Vec<Rule>,
    #[serde(default)]
    pub runs: Vec<Run>,
}

impl Script {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))
    }
}

pub struct RuleProvider {
    rules: Vec<Rule>,
}

impl RuleProvider {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleProvider { rules }
    }

    pub fn respond(&self, request: &PromptRequest) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| {
                r.template == request.template_id
                    && r.matches.iter().all(|(k, needle)| {
                        request.variables.get(k).is_some_and(|v| v.contains(needle.as_str()))
                    })
            })
            .map(|r| r.response.as_str())
    }
}

#[async_trait]
impl LlmProvider for RuleProvider {
    async fn complete(&self, request: &PromptRequest, _rendered: &str) -> Result<String, LlmError> {
        self.respond(request).map(str::to_string).ok_or_else(|| {
            LlmError::provider(format!(
                "no rule for {} with variables {}",
                request.template_id,
                serde_json::to_string(&request.variables).unwrap_or_default()
            ))
        })
    }

    async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError> {
        Ok(texts.iter().map(|t| scripted_embedding(t)).collect())
    }
}

/// Runs the script's scenario and extra runs against `corpus_path`, writing
/// every completion to `out` as a fixture. Returns the scenario's JSON export.
pub async fn record(script: &Script, corpus_path: &Path, out: &Path) -> anyhow::Result<String> {
    let provider: Arc<dyn LlmProvider> = Arc::new(RecordingProvider::new(
        Arc::new(RuleProvider::new(script.rules.clone())),
        out,
    )?);
    let gateway = Gateway::new(provider, 4);
    let corpus = Corpus::load(corpus_path)?;
    let scholar = ScholarClient::from_corpus(corpus);
    let data = tempfile::tempdir()?;
    let mut config = AppConfig::from_lookup(|_| None)?;
    config.data_dir = data.path().to_path_buf();
    let services = Services::from_parts(config, gateway.clone(), scholar.clone())?;
    let export = services
        .headless(&script.topic, script.max_fields, true, ExportFormat::Json)
        .await
        .map_err(|e| anyhow::anyhow!("scenario: {e}"))?;

    for run in &script.runs {
        match run {
            Run::TopicEqs { topic, max_fields } => {
                let topic = normalize_topic(topic)?;
                let mut ids = EqIdAllocator::default();
                generate_topic_eqs(&topic, scholar.catalog(), *max_fields, DEFAULT_NUM_RQ, &mut ids, &gateway)
                    .await?;
            }
            Run::Expand { topic, question, discipline } => {
                let topic = normalize_topic(topic)?;
                let eq = user_eq(question, discipline);
                expand_queries(&eq, &topic, &gateway).await?;
            }
            Run::PaperEqs { topic, paper_id, keywords } => {
                let topic = normalize_topic(topic)?;
                let paper: PaperRecord = scholar.get_paper(paper_id).await?;
                let mut ids = EqIdAllocator::default();
                eqs_from_paper(&paper, keywords, &topic, &[], scholar.catalog(), &mut ids, &gateway).await?;
            }
        }
    }
    Ok(export)
}

fn user_eq(text: &str, discipline: &str) -> ExploratoryQuestion {
    ExploratoryQuestion {
        id: "eq-1".into(),
        text: text.into(),
        discipline: discipline.into(),
        subfield: None,
        origin: EqOrigin::UserCreated,
        selected: true,
        issues: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[tokio::test]
    async fn first_matching_rule_wins() {
        let p = RuleProvider::new(vec![
            Rule {
                template: TemplateId::ThemeTitle,
                matches: [("papers".to_string(), "Nudges".to_string())].into(),
                response: "Nudging".into(),
            },
            Rule {
                template: TemplateId::ThemeTitle,
                matches: Default::default(),
                response: "Other".into(),
            },
        ]);
        let req = |papers: &str| PromptRequest::new(TemplateId::ThemeTitle).var("papers", papers);
        assert_eq!(p.complete(&req("1. Nudges at work"), "").await.unwrap(), "Nudging");
        assert_eq!(p.complete(&req("1. Trains"), "").await.unwrap(), "Other");
        let miss = PromptRequest::new(TemplateId::QueryTerms);
        assert!(p.complete(&miss, "").await.is_err());
    }
}
