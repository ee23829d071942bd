//! Shared domain types. Everything here is an immutable value object.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text;

/// Discipline used for papers that carry no field-of-study tag.
pub const UNKNOWN_DISCIPLINE: &str = "Unknown";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("research topic is empty")]
    EmptyTopic,
}

/// Dense embedding vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// Returns a unit-length copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Vector(self.0.iter().map(|x| x / n).collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Vector(self.0.iter().map(|x| x * factor).collect())
    }

    /// Concatenates the given vectors in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Vector>) -> Self {
        Vector(parts.into_iter().flat_map(|v| v.0.iter().copied()).collect())
    }

    /// Component-wise arithmetic mean. `None` when `vectors` is empty.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Vector>) -> Option<Self> {
        let mut iter = vectors.into_iter();
        let first = iter.next()?;
        let mut acc = first.0.clone();
        let mut count = 1usize;
        for v in iter {
            for (a, b) in acc.iter_mut().zip(&v.0) {
                *a += b;
            }
            count += 1;
        }
        Some(Vector(acc.into_iter().map(|x| x / count as f64).collect()))
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// A trimmed research topic with its extracted concept phrases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchTopic {
    pub text: String,
    pub concepts: Vec<String>,
}

impl ResearchTopic {
    pub fn new(text: &str) -> Result<Self, ModelError> {
        normalize_topic(text)
    }
}

impl fmt::Display for ResearchTopic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Trims `text` and extracts its concepts; empty topics are rejected.
pub fn normalize_topic(text: &str) -> Result<ResearchTopic, ModelError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ModelError::EmptyTopic);
    }
    Ok(ResearchTopic {
        text: trimmed.to_string(),
        concepts: text::extract_concepts(trimmed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqOrigin {
    TopicSeeded,
    PaperSeeded,
    UserCreated,
    UserEdited,
}

/// Post-generation validation findings; flagged questions are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqIssue {
    MissingQuestionMark,
    TooLong,
}

/// An exploratory question: one discipline-tagged search direction that both
/// the user and the system can edit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploratoryQuestion {
    pub id: String,
    pub text: String,
    pub discipline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subfield: Option<String>,
    pub origin: EqOrigin,
    pub selected: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<EqIssue>,
}

impl ExploratoryQuestion {
    /// Replaces the text, keeping the id and marking the question as edited.
    pub fn edited(&self, text: &str) -> Self {
        let mut eq = self.clone();
        eq.text = text.trim().to_string();
        eq.origin = EqOrigin::UserEdited;
        eq.issues = validate_eq_text(&eq.text);
        eq
    }
}

/// Upper bound on question length accepted without a `TooLong` flag.
pub const MAX_EQ_WORDS: usize = 20;

pub fn validate_eq_text(text: &str) -> Vec<EqIssue> {
    let mut issues = Vec::new();
    if !text.trim_end().ends_with('?') {
        issues.push(EqIssue::MissingQuestionMark);
    }
    if text.split_whitespace().count() > MAX_EQ_WORDS {
        issues.push(EqIssue::TooLong);
    }
    issues
}

/// Metadata of one retrieved paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub disciplines: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub citation_count: u64,
}

impl PaperRecord {
    /// Disciplines used for grouping; an untagged paper falls under
    /// [`UNKNOWN_DISCIPLINE`].
    pub fn effective_disciplines(&self) -> Vec<String> {
        if self.disciplines.is_empty() {
            vec![UNKNOWN_DISCIPLINE.to_string()]
        } else {
            self.disciplines.clone()
        }
    }

    pub fn has_discipline(&self, discipline: &str) -> bool {
        self.disciplines
            .iter()
            .any(|d| d.eq_ignore_ascii_case(discipline))
    }

    /// Title and abstract joined for embedding.
    pub fn metadata_text(&self) -> String {
        if self.abstract_text.trim().is_empty() {
            self.title.clone()
        } else {
            format!("{}. {}", self.title.trim_end_matches('.'), self.abstract_text)
        }
    }
}

/// The frame for every relevance computation: topic, the selected question,
/// and the union of their concepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationContext {
    pub topic: ResearchTopic,
    pub eq: ExploratoryQuestion,
    pub concepts: Vec<String>,
}

impl ExplorationContext {
    pub fn new(topic: ResearchTopic, eq: ExploratoryQuestion) -> Self {
        let mut concepts = topic.concepts.clone();
        for c in text::extract_concepts(&eq.text) {
            if !concepts.contains(&c) {
                concepts.push(c);
            }
        }
        ExplorationContext { topic, eq, concepts }
    }
}
