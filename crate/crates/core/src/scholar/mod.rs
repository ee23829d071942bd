//! Scholarly search client: keyword search plus citation/reference lookup,
//! backed either by a Semantic Scholar-compatible HTTP API or by a bundled
//! offline corpus, with an optional on-disk response cache.

mod cache;
mod corpus;
mod live;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::model::{PaperRecord, UNKNOWN_DISCIPLINE};

pub use cache::ResponseCache;
pub use corpus::{Corpus, CorpusFile};
pub use live::LiveScholar;

/// Default per-query result limit.
pub const DEFAULT_RESULTS_PER_QUERY: usize = 20;
/// Default number of requests in flight against one host.
pub const DEFAULT_REQUEST_BUDGET: usize = 5;
pub const MAX_QUERY_CHARS: usize = 300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScholarError {
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("paper `{0}` not found")]
    NotFound(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("limit {0} outside [1, 100]")]
    InvalidLimit(usize),
    #[error("configuration error: {0}")]
    Config(String),
}

/// A validated keyword query: non-empty, at most 300 characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QueryString(String);

impl QueryString {
    pub fn new(text: &str) -> Result<Self, ScholarError> {
        let t = text.trim();
        if t.is_empty() {
            return Err(ScholarError::InvalidQuery("empty query".into()));
        }
        if t.chars().count() > MAX_QUERY_CHARS {
            return Err(ScholarError::InvalidQuery(format!(
                "query longer than {MAX_QUERY_CHARS} characters"
            )));
        }
        Ok(QueryString(t.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for QueryString {
    type Error = ScholarError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        QueryString::new(&s)
    }
}

impl From<QueryString> for String {
    fn from(q: QueryString) -> String {
        q.0
    }
}

impl fmt::Display for QueryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Fields of study used by Semantic Scholar.
pub const DEFAULT_DISCIPLINES: [&str; 23] = [
    "Agricultural and Food Sciences",
    "Art",
    "Biology",
    "Business",
    "Chemistry",
    "Computer Science",
    "Economics",
    "Education",
    "Engineering",
    "Environmental Science",
    "Geography",
    "Geology",
    "History",
    "Law",
    "Linguistics",
    "Materials Science",
    "Mathematics",
    "Medicine",
    "Philosophy",
    "Physics",
    "Political Science",
    "Psychology",
    "Sociology",
];

/// The configured discipline list, matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisciplineCatalog {
    names: Vec<String>,
}

impl Default for DisciplineCatalog {
    fn default() -> Self {
        DisciplineCatalog::new(DEFAULT_DISCIPLINES.iter().map(|s| s.to_string()))
    }
}

impl DisciplineCatalog {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        DisciplineCatalog {
            names: names.into_iter().collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Canonical spelling of `name`, if it is in the list.
    pub fn canonical(&self, name: &str) -> Option<&str> {
        let name = name.trim();
        self.names
            .iter()
            .find(|n| n.eq_ignore_ascii_case(name))
            .map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.canonical(name).is_some()
    }

    /// Maps raw tags onto the list: unknown tags become `Unknown`, duplicates
    /// are dropped, order of first occurrence is kept.
    pub fn normalize(&self, raw: &[String]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for tag in raw {
            let name = self
                .canonical(tag)
                .map(str::to_string)
                .unwrap_or_else(|| UNKNOWN_DISCIPLINE.to_string());
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkDirection {
    Citations,
    References,
}

impl LinkDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkDirection::Citations => "citations",
            LinkDirection::References => "references",
        }
    }
}

impl FromStr for LinkDirection {
    type Err = ScholarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "citations" => Ok(LinkDirection::Citations),
            "references" => Ok(LinkDirection::References),
            other => Err(ScholarError::Config(format!("unknown direction `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScholarMode {
    Live,
    Corpus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScholarConfig {
    pub mode: ScholarMode,
    pub base_url: String,
    pub api_key: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub corpus_path: Option<PathBuf>,
    pub request_budget: usize,
}

impl Default for ScholarConfig {
    fn default() -> Self {
        ScholarConfig {
            mode: ScholarMode::Live,
            base_url: "https://api.semanticscholar.org/graph/v1".into(),
            api_key: None,
            cache_dir: None,
            corpus_path: None,
            request_budget: DEFAULT_REQUEST_BUDGET,
        }
    }
}

impl ScholarConfig {
    /// Reads `SCHOLAR_MODE`, `SCHOLAR_API_KEY`, `SCHOLAR_BASE_URL`,
    /// `CACHE_DIR` and `SCHOLAR_CORPUS`.
    pub fn from_env() -> Result<Self, ScholarError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ScholarError> {
        let mut cfg = ScholarConfig::default();
        if let Some(mode) = get("SCHOLAR_MODE") {
            cfg.mode = match mode.to_ascii_lowercase().as_str() {
                "live" => ScholarMode::Live,
                "corpus" => ScholarMode::Corpus,
                other => {
                    return Err(ScholarError::Config(format!("unknown SCHOLAR_MODE `{other}`")))
                }
            };
        }
        if let Some(v) = get("SCHOLAR_BASE_URL") {
            cfg.base_url = v;
        }
        cfg.api_key = get("SCHOLAR_API_KEY");
        cfg.cache_dir = get("CACHE_DIR").map(PathBuf::from);
        cfg.corpus_path = get("SCHOLAR_CORPUS").map(PathBuf::from);
        Ok(cfg)
    }
}

enum Backend {
    Corpus(Corpus),
    Live(LiveScholar),
}

/// Search client shared across tasks.
#[derive(Clone)]
pub struct ScholarClient {
    backend: Arc<Backend>,
    cache: Option<ResponseCache>,
    budget: Arc<Semaphore>,
    catalog: DisciplineCatalog,
}

impl fmt::Debug for ScholarClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match *self.backend {
            Backend::Corpus(_) => "corpus",
            Backend::Live(_) => "live",
        };
        f.debug_struct("ScholarClient")
            .field("mode", &mode)
            .field("cache", &self.cache.is_some())
            .finish()
    }
}

impl ScholarClient {
    pub fn from_corpus(corpus: Corpus) -> Self {
        ScholarClient {
            backend: Arc::new(Backend::Corpus(corpus)),
            cache: None,
            budget: Arc::new(Semaphore::new(DEFAULT_REQUEST_BUDGET)),
            catalog: DisciplineCatalog::default(),
        }
    }

    pub fn from_live(live: LiveScholar, request_budget: usize) -> Self {
        ScholarClient {
            backend: Arc::new(Backend::Live(live)),
            cache: None,
            budget: Arc::new(Semaphore::new(request_budget.max(1))),
            catalog: DisciplineCatalog::default(),
        }
    }

    pub fn from_config(config: &ScholarConfig) -> Result<Self, ScholarError> {
        let mut client = match config.mode {
            ScholarMode::Corpus => {
                let path = config.corpus_path.as_ref().ok_or_else(|| {
                    ScholarError::Config("corpus mode requires SCHOLAR_CORPUS".into())
                })?;
                ScholarClient::from_corpus(Corpus::load(path)?)
            }
            ScholarMode::Live => ScholarClient::from_live(
                LiveScholar::new(&config.base_url, config.api_key.clone())?,
                config.request_budget,
            ),
        };
        if let Some(dir) = &config.cache_dir {
            client = client.with_cache(ResponseCache::open(dir)?);
        }
        Ok(client)
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_catalog(mut self, catalog: DisciplineCatalog) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn catalog(&self) -> &DisciplineCatalog {
        &self.catalog
    }

    fn finish(&self, papers: Vec<PaperRecord>) -> Vec<PaperRecord> {
        let mut seen = std::collections::HashSet::new();
        papers
            .into_iter()
            .filter(|p| seen.insert(p.paper_id.clone()))
            .map(|mut p| {
                p.disciplines = self.catalog.normalize(&p.disciplines);
                p
            })
            .collect()
    }

    /// Keyword search returning at most `limit` deduplicated records.
    pub async fn search_papers(
        &self,
        query: &QueryString,
        limit: usize,
    ) -> Result<Vec<PaperRecord>, ScholarError> {
        if !(1..=100).contains(&limit) {
            return Err(ScholarError::InvalidLimit(limit));
        }
        let key = ResponseCache::key(&["search", query.as_str(), &limit.to_string()]);
        if let Some(hit) = self.cached(&key).await? {
            return Ok(hit);
        }
        let papers = match &*self.backend {
            Backend::Corpus(c) => c.search(query.as_str(), limit),
            Backend::Live(live) => {
                let _permit = self.budget.acquire().await.expect("budget semaphore closed");
                live.search(query.as_str(), limit).await?
            }
        };
        let mut papers = self.finish(papers);
        papers.truncate(limit);
        self.store(&key, &papers).await?;
        Ok(papers)
    }

    /// Runs every query concurrently and merges the results by paper id,
    /// keeping first occurrences in query order.
    pub async fn search_many(
        &self,
        queries: &[QueryString],
        limit: usize,
    ) -> Result<Vec<PaperRecord>, ScholarError> {
        let results =
            futures::future::join_all(queries.iter().map(|q| self.search_papers(q, limit))).await;
        let mut merged = Vec::new();
        for r in results {
            merged.extend(r?);
        }
        Ok(self.finish(merged))
    }

    pub async fn fetch_links(
        &self,
        paper_id: &str,
        direction: LinkDirection,
    ) -> Result<Vec<PaperRecord>, ScholarError> {
        let key = ResponseCache::key(&["links", paper_id, direction.as_str()]);
        if let Some(hit) = self.cached(&key).await? {
            return Ok(hit);
        }
        let papers = match &*self.backend {
            Backend::Corpus(c) => c.links(paper_id, direction)?,
            Backend::Live(live) => {
                let _permit = self.budget.acquire().await.expect("budget semaphore closed");
                live.links(paper_id, direction).await?
            }
        };
        let papers = self.finish(papers);
        self.store(&key, &papers).await?;
        Ok(papers)
    }

    pub async fn get_paper(&self, paper_id: &str) -> Result<PaperRecord, ScholarError> {
        let paper = match &*self.backend {
            Backend::Corpus(c) => c
                .get(paper_id)
                .cloned()
                .ok_or_else(|| ScholarError::NotFound(paper_id.to_string()))?,
            Backend::Live(live) => {
                let _permit = self.budget.acquire().await.expect("budget semaphore closed");
                live.get(paper_id).await?
            }
        };
        Ok(self.finish(vec![paper]).remove(0))
    }

    async fn cached(&self, key: &str) -> Result<Option<Vec<PaperRecord>>, ScholarError> {
        match &self.cache {
            Some(cache) => cache.get(key).await,
            None => Ok(None),
        }
    }

    async fn store(&self, key: &str, papers: &[PaperRecord]) -> Result<(), ScholarError> {
        match &self.cache {
            Some(cache) => cache.put(key, papers).await,
            None => Ok(()),
        }
    }
}
