//! The explore pipeline and session operations behind the HTTP API and CLI.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use coexplore_core::eq::{eqs_from_paper, generate_topic_eqs, normalized_text};
use coexplore_core::llm::Gateway;
use coexplore_core::model::{
    normalize_topic, validate_eq_text, EqOrigin, ExplorationContext, ExploratoryQuestion, PaperRecord,
};
use coexplore_core::query::expand_queries;
use coexplore_core::rank::{rank_links, DisciplineGroup};
use coexplore_core::relevance::{annotate_paper, EmbeddingTable, PaperAnnotation};
use coexplore_core::scholar::{LinkDirection, ScholarClient};
use coexplore_core::session::{
    CollectionEdit, Exploration, SessionManager, SessionState, SessionStore, SessionSummary,
};
use coexplore_core::text;
use coexplore_core::theming::{extract_themes, Theme};

use crate::config::AppConfig;
use crate::error::AppError;
use crate::export::{self, ExportFormat};
use crate::jobs::{ExploreJob, JobRegistry, JobStatus};

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerateMode {
    Topic,
    Paper,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GenerateRequest {
    pub mode: GenerateMode,
    #[serde(default)]
    pub paper_id: Option<String>,
    #[serde(default)]
    pub focus_keywords: Vec<String>,
    #[serde(default)]
    pub max_fields: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct PatchEq {
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub selected: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct NewEq {
    pub text: String,
    pub discipline: String,
}

/// A paper with its relevance cues flattened in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperView {
    #[serde(flatten)]
    pub paper: PaperRecord,
    #[serde(flatten)]
    pub annotation: Option<PaperAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeView {
    #[serde(flatten)]
    pub theme: Theme,
    pub papers: Vec<PaperView>,
}

/// A theme set with every member paper expanded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemesView {
    pub eq_id: String,
    pub queries: Vec<String>,
    pub themes: Vec<ThemeView>,
    pub possibly_relevant: Vec<String>,
    pub possibly_relevant_papers: Vec<PaperView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinksView {
    pub paper_id: String,
    pub direction: LinkDirection,
    pub groups: Vec<DisciplineGroup>,
}

pub struct Services {
    pub config: AppConfig,
    pub gateway: Gateway,
    pub scholar: ScholarClient,
    pub sessions: SessionManager,
    pub jobs: JobRegistry,
}

impl Services {
    pub fn build(config: AppConfig) -> anyhow::Result<Arc<Self>> {
        let gateway = Gateway::from_config(&config.provider)?;
        let scholar = ScholarClient::from_config(&config.scholar)?;
        Self::from_parts(config, gateway, scholar)
    }

    pub fn from_parts(config: AppConfig, gateway: Gateway, scholar: ScholarClient) -> anyhow::Result<Arc<Self>> {
        let store = SessionStore::open(&config.data_dir)?;
        Ok(Arc::new(Services {
            config,
            gateway,
            scholar,
            sessions: SessionManager::new(store),
            jobs: JobRegistry::new(),
        }))
    }

    pub fn create_session(&self, topic: &str) -> AppResult<SessionState> {
        let topic = normalize_topic(topic)?;
        Ok(self.sessions.create(topic)?)
    }

    pub async fn generate_eqs(&self, session_id: &str, req: &GenerateRequest) -> AppResult<Vec<ExploratoryQuestion>> {
        let state = self.sessions.snapshot(session_id).await?;
        let mut ids = state.eq_ids.clone();
        let generated = match req.mode {
            GenerateMode::Topic => {
                let max_fields = req.max_fields.unwrap_or(self.config.max_fields);
                generate_topic_eqs(
                    &state.topic,
                    self.scholar.catalog(),
                    max_fields,
                    self.config.num_rq,
                    &mut ids,
                    &self.gateway,
                )
                .await?
            }
            GenerateMode::Paper => {
                let paper_id = req
                    .paper_id
                    .as_deref()
                    .ok_or_else(|| AppError::BadRequest("mode=paper requires paper_id".into()))?;
                let paper = match state.papers.get(paper_id) {
                    Some(p) => p.clone(),
                    None => self.scholar.get_paper(paper_id).await?,
                };
                eqs_from_paper(
                    &paper,
                    &req.focus_keywords,
                    &state.topic,
                    &state.eqs,
                    self.scholar.catalog(),
                    &mut ids,
                    &self.gateway,
                )
                .await?
            }
        };
        // Ids are reassigned under the session lock so concurrent requests
        // never collide.
        let added = self
            .sessions
            .update(session_id, move |s| {
                let mut added = Vec::new();
                for mut eq in generated {
                    let norm = normalized_text(&eq.text);
                    if s.eqs.iter().any(|e| normalized_text(&e.text) == norm) {
                        continue;
                    }
                    eq.id = s.eq_ids.next_id();
                    s.eqs.push(eq.clone());
                    added.push(eq);
                }
                Ok(added)
            })
            .await?;
        Ok(added)
    }

    pub async fn patch_eq(&self, session_id: &str, eq_id: &str, patch: &PatchEq) -> AppResult<ExploratoryQuestion> {
        if let Some(t) = &patch.text {
            if t.trim().is_empty() {
                return Err(AppError::BadRequest("question text is empty".into()));
            }
        }
        let patch = patch.clone();
        let eq_id = eq_id.to_string();
        Ok(self
            .sessions
            .update(session_id, move |s| {
                let eq = s.find_eq_mut(&eq_id)?;
                if let Some(t) = &patch.text {
                    if t.trim() != eq.text {
                        *eq = eq.edited(t);
                    }
                }
                if let Some(sel) = patch.selected {
                    eq.selected = sel;
                }
                Ok(eq.clone())
            })
            .await?)
    }

    pub async fn add_user_eq(&self, session_id: &str, new: &NewEq) -> AppResult<ExploratoryQuestion> {
        let text = new.text.trim().to_string();
        if text.is_empty() {
            return Err(AppError::BadRequest("question text is empty".into()));
        }
        let discipline = self
            .scholar
            .catalog()
            .canonical(new.discipline.trim())
            .ok_or_else(|| AppError::BadRequest(format!("unknown discipline `{}`", new.discipline)))?
            .to_string();
        Ok(self
            .sessions
            .update(session_id, move |s| {
                let eq = ExploratoryQuestion {
                    id: s.eq_ids.next_id(),
                    issues: validate_eq_text(&text),
                    text,
                    discipline,
                    subfield: None,
                    origin: EqOrigin::UserCreated,
                    selected: true,
                };
                s.eqs.push(eq.clone());
                Ok(eq)
            })
            .await?)
    }

    async fn selected_eq(&self, session_id: &str, eq_id: &str) -> AppResult<ExploratoryQuestion> {
        let state = self.sessions.snapshot(session_id).await?;
        let eq = state.find_eq(eq_id)?;
        if !eq.selected {
            return Err(AppError::Conflict(format!("{eq_id} is not selected")));
        }
        Ok(eq.clone())
    }

    /// Checks preconditions, registers a job and runs it in the background.
    pub async fn start_explore(self: &Arc<Self>, session_id: &str, eq_id: &str) -> AppResult<ExploreJob> {
        self.selected_eq(session_id, eq_id).await?;
        let job = self.jobs.create(session_id, eq_id);
        let this = Arc::clone(self);
        let (sid, eid, jid) = (session_id.to_string(), eq_id.to_string(), job.job_id.clone());
        tokio::spawn(async move {
            let _ = this.run_job(&sid, &eid, &jid).await;
        });
        Ok(job)
    }

    /// Runs an exploration to completion, for callers that want to wait.
    pub async fn explore(&self, session_id: &str, eq_id: &str) -> AppResult<ExploreJob> {
        self.selected_eq(session_id, eq_id).await?;
        let job = self.jobs.create(session_id, eq_id);
        self.run_job(session_id, eq_id, &job.job_id).await?;
        Ok(self.jobs.get(session_id, &job.job_id).expect("job registered"))
    }

    async fn run_job(&self, session_id: &str, eq_id: &str, job_id: &str) -> AppResult<()> {
        let mut stage = JobStatus::Queued;
        let result = self.pipeline(session_id, eq_id, job_id, &mut stage).await;
        match &result {
            Ok(()) => self.jobs.advance(job_id, JobStatus::Done),
            Err(e) => {
                tracing::warn!(job = job_id, stage = stage.as_str(), error = %e, "explore failed");
                self.jobs.fail(job_id, stage, &e.to_string());
            }
        }
        result
    }

    async fn pipeline(&self, session_id: &str, eq_id: &str, job_id: &str, stage: &mut JobStatus) -> AppResult<()> {
        let state = self.sessions.snapshot(session_id).await?;
        let eq = state.find_eq(eq_id)?.clone();

        *stage = JobStatus::Expanding;
        self.jobs.advance(job_id, *stage);
        let expansion = expand_queries(&eq, &state.topic, &self.gateway).await?;

        *stage = JobStatus::Searching;
        self.jobs.advance(job_id, *stage);
        let papers = self
            .scholar
            .search_many(&expansion.queries, self.config.results_per_query)
            .await?;

        *stage = JobStatus::Theming;
        self.jobs.advance(job_id, *stage);
        let context = ExplorationContext::new(state.topic.clone(), eq);
        let mut table = EmbeddingTable::new();
        let themes = extract_themes(
            &papers,
            &context,
            &self.config.clustering,
            &self.config.relevance,
            &self.gateway,
            &mut table,
        )
        .await?;
        let annotations = self.annotate(&papers, &context, &mut table).await?;

        let exploration = Exploration {
            expansion,
            paper_ids: papers.iter().map(|p| p.paper_id.clone()).collect(),
            themes,
            annotations,
        };
        let eq_id = eq_id.to_string();
        self.sessions
            .update(session_id, move |s| s.commit_exploration(&eq_id, &papers, exploration))
            .await?;
        Ok(())
    }

    async fn annotate(
        &self,
        papers: &[PaperRecord],
        context: &ExplorationContext,
        table: &mut EmbeddingTable,
    ) -> AppResult<BTreeMap<String, PaperAnnotation>> {
        let mut phrases: Vec<String> = context.concepts.clone();
        for p in papers {
            for s in text::split_sentences(&p.abstract_text) {
                phrases.extend(text::extract_concepts(&s));
            }
        }
        if !phrases.is_empty() {
            table.ensure(&self.gateway, phrases.iter()).await?;
        }
        let mut out = BTreeMap::new();
        for p in papers {
            out.insert(p.paper_id.clone(), annotate_paper(p, context, table, &self.config.relevance)?);
        }
        Ok(out)
    }

    pub async fn job(&self, session_id: &str, job_id: &str) -> AppResult<ExploreJob> {
        self.sessions.snapshot(session_id).await?;
        self.jobs
            .get(session_id, job_id)
            .ok_or_else(|| AppError::NotFound(format!("unknown job `{job_id}`")))
    }

    pub async fn themes(&self, session_id: &str, eq_id: &str) -> AppResult<ThemesView> {
        let state = self.sessions.snapshot(session_id).await?;
        state.find_eq(eq_id)?;
        let x = state
            .explorations
            .get(eq_id)
            .ok_or_else(|| AppError::NotFound(format!("{eq_id} has not been explored")))?;
        let view = |id: &String| -> Option<PaperView> {
            state.papers.get(id).map(|p| PaperView {
                paper: p.clone(),
                annotation: x.annotations.get(id).cloned(),
            })
        };
        Ok(ThemesView {
            eq_id: eq_id.to_string(),
            queries: x.expansion.queries.iter().map(|q| q.as_str().to_string()).collect(),
            themes: x
                .themes
                .themes
                .iter()
                .map(|t| ThemeView {
                    theme: t.clone(),
                    papers: t.paper_ids.iter().filter_map(view).collect(),
                })
                .collect(),
            possibly_relevant: x.themes.possibly_relevant.clone(),
            possibly_relevant_papers: x.themes.possibly_relevant.iter().filter_map(view).collect(),
        })
    }

    /// Citing or cited papers grouped by discipline and ranked against the
    /// session topic and engagement.
    pub async fn links(&self, paper_id: &str, direction: LinkDirection, session_id: &str) -> AppResult<LinksView> {
        let state = self.sessions.snapshot(session_id).await?;
        let papers = self.scholar.fetch_links(paper_id, direction).await?;
        let groups = if papers.is_empty() {
            Vec::new()
        } else {
            let topic = self.gateway.embed_one(&state.topic.text).await?;
            let texts: Vec<String> = papers.iter().map(PaperRecord::metadata_text).collect();
            let embeddings = self.gateway.embed(&texts).await?;
            rank_links(&papers, &embeddings, &state.engagement, &topic, self.config.beta)?
        };
        if !papers.is_empty() {
            self.sessions
                .update(session_id, move |s| {
                    s.register_papers(&papers);
                    Ok(())
                })
                .await?;
        }
        Ok(LinksView {
            paper_id: paper_id.to_string(),
            direction,
            groups,
        })
    }

    pub async fn edit_collections(&self, session_id: &str, edit: CollectionEdit) -> AppResult<SessionSummary> {
        Ok(self
            .sessions
            .update(session_id, move |s| {
                s.apply_edit(&edit)?;
                Ok(s.summary())
            })
            .await?)
    }

    pub async fn export(&self, session_id: &str, format: ExportFormat) -> AppResult<String> {
        let state = self.sessions.snapshot(session_id).await?;
        Ok(export::render(&state, format))
    }

    /// create, generate, select all, explore all, collect every theme, export.
    pub async fn headless(&self, topic: &str, max_fields: usize, collect: bool, format: ExportFormat) -> AppResult<String> {
        let sid = self.create_session(topic)?.session_id;
        let req = GenerateRequest {
            mode: GenerateMode::Topic,
            paper_id: None,
            focus_keywords: Vec::new(),
            max_fields: Some(max_fields),
        };
        let eqs = self.generate_eqs(&sid, &req).await?;
        tracing::info!(count = eqs.len(), "generated questions");
        for eq in &eqs {
            let select = PatchEq { text: None, selected: Some(true) };
            self.patch_eq(&sid, &eq.id, &select).await?;
        }
        futures::future::try_join_all(eqs.iter().map(|eq| self.explore(&sid, &eq.id))).await?;
        if collect {
            let state = self.sessions.snapshot(&sid).await?;
            for eq in &eqs {
                if let Some(x) = state.explorations.get(&eq.id) {
                    for t in &x.themes.themes {
                        self.edit_collections(&sid, CollectionEdit::DropTheme { theme_id: t.id.clone() })
                            .await?;
                    }
                }
            }
        }
        self.export(&sid, format).await
    }
}
