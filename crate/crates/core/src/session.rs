//! Session state, collection edits and durable per-session JSON storage.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use thiserror::Error;
use tokio::sync::Mutex;

use crate::eq::EqIdAllocator;
use crate::model::{ExploratoryQuestion, ModelError, PaperRecord, ResearchTopic};
use crate::query::QueryExpansion;
use crate::rank::{EngagementEvent, EngagementHistory};
use crate::relevance::PaperAnnotation;
use crate::theming::{Theme, ThemeSet};

pub const SCHEMA_VERSION: u32 = 1;
pub const DATA_DIR_ENV: &str = "DATA_DIR";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("session file is corrupt: {0}")]
    CorruptState(String),
    #[error("unknown {kind} `{id}`")]
    UnknownEntity { kind: &'static str, id: String },
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("session invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CollectionSource {
    FromTheme { theme_id: String },
    FromLinks,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collection {
    pub id: String,
    pub title: String,
    pub paper_ids: Vec<String>,
    pub source: CollectionSource,
}

/// Results of exploring one EQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub expansion: QueryExpansion,
    /// Retrieved papers after dedup, in retrieval order.
    pub paper_ids: Vec<String>,
    pub themes: ThemeSet,
    pub annotations: BTreeMap<String, PaperAnnotation>,
}

/// A change to the user's collections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CollectionEdit {
    /// Copies a theme into a new collection with the theme's title.
    DropTheme { theme_id: String },
    /// Creates an empty collection.
    Create {
        title: String,
        #[serde(default = "manual_source")]
        source: CollectionSource,
    },
    DropPaper { paper_id: String, collection_id: String },
    MovePaper { paper_id: String, from: String, to: String },
    RemovePaper { paper_id: String, collection_id: String },
    Rename { collection_id: String, title: String },
    Delete { collection_id: String },
}

fn manual_source() -> CollectionSource {
    CollectionSource::Manual
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub topic: ResearchTopic,
    pub eqs: Vec<ExploratoryQuestion>,
    pub eq_ids: EqIdAllocator,
    /// Every paper the session has seen, by id.
    pub papers: BTreeMap<String, PaperRecord>,
    pub explorations: BTreeMap<String, Exploration>,
    pub collections: Vec<Collection>,
    pub next_collection: u64,
    pub engagement: EngagementHistory,
    /// Papers that have ever been collected; engagement fires once per id.
    pub collected: BTreeSet<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// Compact view returned after edits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub topic: String,
    pub eq_count: usize,
    pub explored_eqs: Vec<String>,
    pub collections: Vec<Collection>,
    pub engagement: EngagementHistory,
}

impl SessionState {
    pub fn new(topic: ResearchTopic) -> Self {
        let now = Utc::now();
        SessionState {
            session_id: uuid::Uuid::new_v4().to_string(),
            topic,
            eqs: Vec::new(),
            eq_ids: EqIdAllocator::default(),
            papers: BTreeMap::new(),
            explorations: BTreeMap::new(),
            collections: Vec::new(),
            next_collection: 0,
            engagement: EngagementHistory::new(),
            collected: BTreeSet::new(),
            created_at: now,
            updated_at: now,
        }
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            session_id: self.session_id.clone(),
            topic: self.topic.text.clone(),
            eq_count: self.eqs.len(),
            explored_eqs: self.explorations.keys().cloned().collect(),
            collections: self.collections.clone(),
            engagement: self.engagement.clone(),
        }
    }

    pub fn find_eq(&self, eq_id: &str) -> Result<&ExploratoryQuestion, SessionError> {
        self.eqs
            .iter()
            .find(|e| e.id == eq_id)
            .ok_or_else(|| unknown("eq", eq_id))
    }

    pub fn find_eq_mut(&mut self, eq_id: &str) -> Result<&mut ExploratoryQuestion, SessionError> {
        self.eqs
            .iter_mut()
            .find(|e| e.id == eq_id)
            .ok_or_else(|| unknown("eq", eq_id))
    }

    pub fn find_theme(&self, theme_id: &str) -> Option<&Theme> {
        self.explorations.values().find_map(|x| x.themes.theme(theme_id))
    }

    pub fn collection(&self, id: &str) -> Result<&Collection, SessionError> {
        self.collections
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| unknown("collection", id))
    }

    fn collection_index(&self, id: &str) -> Result<usize, SessionError> {
        self.collections
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| unknown("collection", id))
    }

    fn require_paper(&self, paper_id: &str) -> Result<(), SessionError> {
        if self.papers.contains_key(paper_id) {
            Ok(())
        } else {
            Err(unknown("paper", paper_id))
        }
    }

    /// Adds paper records to the paper table, keeping existing entries.
    pub fn register_papers<'a>(&mut self, papers: impl IntoIterator<Item = &'a PaperRecord>) {
        for p in papers {
            self.papers.entry(p.paper_id.clone()).or_insert_with(|| p.clone());
        }
    }

    /// Stores (or replaces) the exploration of an EQ and counts one query
    /// toward its discipline.
    pub fn commit_exploration(
        &mut self,
        eq_id: &str,
        papers: &[PaperRecord],
        exploration: Exploration,
    ) -> Result<(), SessionError> {
        let discipline = self.find_eq(eq_id)?.discipline.clone();
        self.register_papers(papers);
        self.explorations.insert(eq_id.to_string(), exploration);
        self.engagement.record(&EngagementEvent::EqQueried(discipline));
        Ok(())
    }

    fn new_collection_id(&mut self) -> String {
        self.next_collection += 1;
        format!("col-{}", self.next_collection)
    }

    /// Records collection engagement the first time a paper is collected.
    fn mark_collected(&mut self, paper_id: &str) {
        if self.collected.insert(paper_id.to_string()) {
            let disciplines = self.papers[paper_id].effective_disciplines();
            for d in disciplines {
                self.engagement.record(&EngagementEvent::PaperCollected(d));
            }
        }
    }

    fn add_to_collection(&mut self, idx: usize, paper_id: &str) {
        if !self.collections[idx].paper_ids.iter().any(|p| p == paper_id) {
            self.collections[idx].paper_ids.push(paper_id.to_string());
        }
        self.mark_collected(paper_id);
    }

    /// Applies `edit`; on error the state is unchanged. Returns the id of
    /// the collection the edit touched (none for deletions).
    pub fn apply_edit(&mut self, edit: &CollectionEdit) -> Result<Option<String>, SessionError> {
        let touched = match edit {
            CollectionEdit::DropTheme { theme_id } => {
                let theme = self
                    .find_theme(theme_id)
                    .cloned()
                    .ok_or_else(|| unknown("theme", theme_id))?;
                let id = self.new_collection_id();
                self.collections.push(Collection {
                    id: id.clone(),
                    title: theme.title.clone(),
                    paper_ids: Vec::new(),
                    source: CollectionSource::FromTheme {
                        theme_id: theme_id.clone(),
                    },
                });
                let idx = self.collections.len() - 1;
                for p in &theme.paper_ids {
                    self.add_to_collection(idx, p);
                }
                Some(id)
            }
            CollectionEdit::Create { title, source } => {
                let title = checked_title(title)?;
                if let CollectionSource::FromTheme { theme_id } = source {
                    self.find_theme(theme_id).ok_or_else(|| unknown("theme", theme_id))?;
                }
                let id = self.new_collection_id();
                self.collections.push(Collection {
                    id: id.clone(),
                    title,
                    paper_ids: Vec::new(),
                    source: source.clone(),
                });
                Some(id)
            }
            CollectionEdit::DropPaper { paper_id, collection_id } => {
                self.require_paper(paper_id)?;
                let idx = self.collection_index(collection_id)?;
                self.add_to_collection(idx, paper_id);
                Some(collection_id.clone())
            }
            CollectionEdit::MovePaper { paper_id, from, to } => {
                self.require_paper(paper_id)?;
                let src = self.collection_index(from)?;
                let dst = self.collection_index(to)?;
                let pos = self.collections[src]
                    .paper_ids
                    .iter()
                    .position(|p| p == paper_id)
                    .ok_or_else(|| {
                        SessionError::InvalidEdit(format!("paper {paper_id} is not in {from}"))
                    })?;
                if src != dst {
                    self.collections[src].paper_ids.remove(pos);
                    self.add_to_collection(dst, paper_id);
                }
                Some(to.clone())
            }
            CollectionEdit::RemovePaper { paper_id, collection_id } => {
                let idx = self.collection_index(collection_id)?;
                let pos = self.collections[idx]
                    .paper_ids
                    .iter()
                    .position(|p| p == paper_id)
                    .ok_or_else(|| unknown("paper", paper_id))?;
                self.collections[idx].paper_ids.remove(pos);
                Some(collection_id.clone())
            }
            CollectionEdit::Rename { collection_id, title } => {
                let title = checked_title(title)?;
                let idx = self.collection_index(collection_id)?;
                self.collections[idx].title = title;
                Some(collection_id.clone())
            }
            CollectionEdit::Delete { collection_id } => {
                let idx = self.collection_index(collection_id)?;
                self.collections.remove(idx);
                None
            }
        };
        self.updated_at = Utc::now();
        Ok(touched)
    }

    /// Referential integrity checks.
    pub fn check_invariants(&self) -> Result<(), SessionError> {
        let fail = |m: String| Err(SessionError::Invariant(m));
        let mut eq_ids = HashSet::new();
        for e in &self.eqs {
            if !eq_ids.insert(e.id.as_str()) {
                return fail(format!("duplicate eq id {}", e.id));
            }
        }
        for (eq_id, x) in &self.explorations {
            if !eq_ids.contains(eq_id.as_str()) {
                return fail(format!("exploration for unknown eq {eq_id}"));
            }
            if x.themes.eq_id != *eq_id {
                return fail(format!("theme set of {eq_id} is labelled {}", x.themes.eq_id));
            }
            if let Err(m) = x.themes.check_conservation(&x.paper_ids) {
                return fail(format!("exploration {eq_id}: {m}"));
            }
            for p in x.paper_ids.iter().chain(x.annotations.keys()) {
                if !self.papers.contains_key(p) {
                    return fail(format!("exploration {eq_id} references unknown paper {p}"));
                }
            }
        }
        let mut col_ids = HashSet::new();
        for c in &self.collections {
            if !col_ids.insert(c.id.as_str()) {
                return fail(format!("duplicate collection id {}", c.id));
            }
            if c.title.trim().is_empty() {
                return fail(format!("collection {} has an empty title", c.id));
            }
            let mut seen = HashSet::new();
            for p in &c.paper_ids {
                if !self.papers.contains_key(p) {
                    return fail(format!("collection {} references unknown paper {p}", c.id));
                }
                if !seen.insert(p) {
                    return fail(format!("collection {} lists {p} twice", c.id));
                }
                if !self.collected.contains(p) {
                    return fail(format!("paper {p} collected without engagement"));
                }
            }
        }
        if let Some(p) = self.collected.iter().find(|p| !self.papers.contains_key(*p)) {
            return fail(format!("collected paper {p} is unknown"));
        }
        Ok(())
    }
}

fn unknown(kind: &'static str, id: &str) -> SessionError {
    SessionError::UnknownEntity {
        kind,
        id: id.to_string(),
    }
}

fn checked_title(title: &str) -> Result<String, SessionError> {
    let t = title.trim();
    if t.is_empty() {
        return Err(SessionError::InvalidEdit("collection title is empty".into()));
    }
    Ok(t.to_string())
}

#[derive(Deserialize)]
struct StoredSession<'a> {
    schema_version: u32,
    checksum: String,
    #[serde(borrow)]
    state: &'a RawValue,
}

fn checksum(state_json: &str) -> String {
    hex::encode(Sha256::digest(state_json.as_bytes()))
}

/// One JSON document per session, written atomically.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, session_id: &str) -> Result<PathBuf, SessionError> {
        let safe = !session_id.is_empty()
            && session_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !safe {
            return Err(SessionError::NotFound(session_id.to_string()));
        }
        Ok(self.dir.join(format!("{session_id}.json")))
    }

    pub fn save(&self, state: &SessionState) -> Result<(), SessionError> {
        let path = self.path(&state.session_id)?;
        let body = serde_json::to_string(state).map_err(std::io::Error::other)?;
        let doc = format!(
            "{{\"schema_version\":{SCHEMA_VERSION},\"checksum\":\"{}\",\"state\":{body}}}\n",
            checksum(&body)
        );
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(doc.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(&self, session_id: &str) -> Result<SessionState, SessionError> {
        let path = self.path(session_id)?;
        let raw = match std::fs::read_to_string(&path) {
            Ok(r) => r,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(SessionError::NotFound(session_id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let stored: StoredSession =
            serde_json::from_str(&raw).map_err(|e| SessionError::CorruptState(e.to_string()))?;
        if stored.schema_version != SCHEMA_VERSION {
            return Err(SessionError::CorruptState(format!(
                "unsupported schema version {}",
                stored.schema_version
            )));
        }
        if checksum(stored.state.get()) != stored.checksum {
            return Err(SessionError::CorruptState("checksum mismatch".into()));
        }
        serde_json::from_str(stored.state.get()).map_err(|e| SessionError::CorruptState(e.to_string()))
    }

    pub fn exists(&self, session_id: &str) -> bool {
        self.path(session_id).is_ok_and(|p| p.exists())
    }
}

/// Serializes writers per session; distinct sessions do not contend.
#[derive(Debug)]
pub struct SessionManager {
    store: SessionStore,
    sessions: std::sync::Mutex<HashMap<String, Arc<Mutex<SessionState>>>>,
}

impl SessionManager {
    pub fn new(store: SessionStore) -> Self {
        SessionManager {
            store,
            sessions: std::sync::Mutex::new(HashMap::new()),
        }
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn create(&self, topic: ResearchTopic) -> Result<SessionState, SessionError> {
        let state = SessionState::new(topic);
        self.store.save(&state)?;
        self.sessions
            .lock()
            .expect("session map poisoned")
            .insert(state.session_id.clone(), Arc::new(Mutex::new(state.clone())));
        Ok(state)
    }

    fn handle(&self, session_id: &str) -> Result<Arc<Mutex<SessionState>>, SessionError> {
        let mut map = self.sessions.lock().expect("session map poisoned");
        if let Some(h) = map.get(session_id) {
            return Ok(h.clone());
        }
        let state = self.store.load(session_id)?;
        let h = Arc::new(Mutex::new(state));
        map.insert(session_id.to_string(), h.clone());
        Ok(h)
    }

    /// A copy of the current state.
    pub async fn snapshot(&self, session_id: &str) -> Result<SessionState, SessionError> {
        Ok(self.handle(session_id)?.lock().await.clone())
    }

    /// Runs `f` on a copy of the session; if it succeeds and the result
    /// passes the invariant checks, the copy is persisted and becomes
    /// current. Otherwise nothing changes.
    pub async fn update<T>(
        &self,
        session_id: &str,
        f: impl FnOnce(&mut SessionState) -> Result<T, SessionError>,
    ) -> Result<T, SessionError> {
        let handle = self.handle(session_id)?;
        let mut guard = handle.lock().await;
        let mut next = guard.clone();
        let out = f(&mut next)?;
        next.updated_at = Utc::now();
        next.check_invariants()?;
        self.store.save(&next)?;
        *guard = next;
        Ok(out)
    }
}
