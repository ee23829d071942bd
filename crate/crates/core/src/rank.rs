//! Discipline ranking that trades off relevance against how much of each
//! discipline the user has already engaged with.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{PaperRecord, Vector};
use crate::relevance::{cosine, RelevanceError};

pub const DEFAULT_BETA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("topic embedding is a zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{papers} papers but {embeddings} embeddings")]
    LengthMismatch { papers: usize, embeddings: usize },
    #[error("no linked papers to rank")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "discipline", rename_all = "snake_case")]
pub enum EngagementEvent {
    PaperCollected(String),
    EqQueried(String),
}

/// Per-discipline engagement counters. Counters only ever grow.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EngagementHistory {
    pub papers_collected: BTreeMap<String, u64>,
    pub eqs_queried: BTreeMap<String, u64>,
}

impl EngagementHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, event: &EngagementEvent) {
        let (map, d) = match event {
            EngagementEvent::PaperCollected(d) => (&mut self.papers_collected, d),
            EngagementEvent::EqQueried(d) => (&mut self.eqs_queried, d),
        };
        *map.entry(d.clone()).or_insert(0) += 1;
    }

    pub fn papers(&self, discipline: &str) -> u64 {
        self.papers_collected.get(discipline).copied().unwrap_or(0)
    }

    pub fn queries(&self, discipline: &str) -> u64 {
        self.eqs_queried.get(discipline).copied().unwrap_or(0)
    }

    /// `U_d = p_d + q_d`.
    pub fn engagement(&self, discipline: &str) -> u64 {
        self.papers(discipline) + self.queries(discipline)
    }

    pub fn exploration_score(&self, discipline: &str) -> f64 {
        exploration_score(self.engagement(discipline))
    }

    /// True when no counter in `self` is below its value in `earlier`.
    pub fn dominates(&self, earlier: &EngagementHistory) -> bool {
        let ge = |now: &BTreeMap<String, u64>, then: &BTreeMap<String, u64>| {
            then.iter().all(|(d, n)| now.get(d).copied().unwrap_or(0) >= *n)
        };
        ge(&self.papers_collected, &earlier.papers_collected)
            && ge(&self.eqs_queried, &earlier.eqs_queried)
    }
}

/// `E = 1 / (U + 1)`.
pub fn exploration_score(engagement: u64) -> f64 {
    1.0 / (engagement as f64 + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplineScore {
    pub discipline: String,
    pub engagement: u64,
    /// `E_d`.
    pub exploration_score: f64,
    /// `V_d`: mean similarity of the discipline's papers to the topic.
    pub relevance_score: f64,
    /// `C_d = beta * V_d + E_d`.
    pub combined_score: f64,
    pub beta: f64,
}

/// Papers of one discipline, most similar first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplineGroup {
    pub score: DisciplineScore,
    pub papers: Vec<RankedPaper>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPaper {
    pub paper: PaperRecord,
    pub similarity: f64,
}

fn check_inputs(papers: usize, embeddings: &[Vector], topic: &Vector) -> Result<(), RankError> {
    if papers != embeddings.len() {
        return Err(RankError::LengthMismatch {
            papers,
            embeddings: embeddings.len(),
        });
    }
    if topic.is_zero() {
        return Err(RankError::ZeroVector);
    }
    if let Some(bad) = embeddings.iter().find(|e| e.dim() != topic.dim()) {
        return Err(RankError::DimensionMismatch(topic.dim(), bad.dim()));
    }
    Ok(())
}

/// Similarity of one paper to the topic; a zero paper embedding scores 0.
fn similarity(paper: &Vector, topic: &Vector) -> Result<f64, RankError> {
    match cosine(paper, topic) {
        Ok(s) => Ok(s),
        Err(RelevanceError::ZeroVector) => Ok(0.0),
        Err(RelevanceError::DimensionMismatch(a, b)) => Err(RankError::DimensionMismatch(a, b)),
        Err(_) => unreachable!("cosine only fails on shape"),
    }
}

/// Orders indices of `embeddings` by similarity to `topic`, descending, with
/// ties broken by ascending paper id.
pub fn rank_papers_within(
    papers: &[PaperRecord],
    embeddings: &[Vector],
    topic: &Vector,
) -> Result<Vec<RankedPaper>, RankError> {
    check_inputs(papers.len(), embeddings, topic)?;
    let mut ranked = papers
        .iter()
        .zip(embeddings)
        .map(|(p, e)| {
            Ok(RankedPaper {
                paper: p.clone(),
                similarity: similarity(e, topic)?,
            })
        })
        .collect::<Result<Vec<_>, RankError>>()?;
    ranked.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.paper.paper_id.cmp(&b.paper.paper_id))
    });
    Ok(ranked)
}

/// Groups linked papers by discipline (a paper counts toward each of its
/// disciplines) and ranks the groups by `C_d` descending, then by name.
pub fn score_disciplines(
    papers: &[PaperRecord],
    embeddings: &[Vector],
    history: &EngagementHistory,
    topic: &Vector,
    beta: f64,
) -> Result<Vec<DisciplineScore>, RankError> {
    Ok(rank_links(papers, embeddings, history, topic, beta)?
        .into_iter()
        .map(|g| g.score)
        .collect())
}

/// [`score_disciplines`] with each group's papers ranked inside it.
pub fn rank_links(
    papers: &[PaperRecord],
    embeddings: &[Vector],
    history: &EngagementHistory,
    topic: &Vector,
    beta: f64,
) -> Result<Vec<DisciplineGroup>, RankError> {
    if papers.is_empty() {
        return Err(RankError::EmptyInput);
    }
    check_inputs(papers.len(), embeddings, topic)?;
    let mut members: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (i, p) in papers.iter().enumerate() {
        for d in p.effective_disciplines() {
            members.entry(d).or_default().insert(i);
        }
    }
    let mut groups = Vec::with_capacity(members.len());
    for (discipline, idx) in members {
        let group_papers: Vec<PaperRecord> = idx.iter().map(|&i| papers[i].clone()).collect();
        let group_vecs: Vec<Vector> = idx.iter().map(|&i| embeddings[i].clone()).collect();
        let ranked = rank_papers_within(&group_papers, &group_vecs, topic)?;
        let relevance_score =
            idx.iter().map(|&i| similarity(&embeddings[i], topic)).sum::<Result<f64, _>>()?
                / idx.len() as f64;
        let engagement = history.engagement(&discipline);
        let exploration = exploration_score(engagement);
        groups.push(DisciplineGroup {
            score: DisciplineScore {
                discipline,
                engagement,
                exploration_score: exploration,
                relevance_score,
                combined_score: beta * relevance_score + exploration,
                beta,
            },
            papers: ranked,
        });
    }
    groups.sort_by(|a, b| {
        b.score
            .combined_score
            .total_cmp(&a.score.combined_score)
            .then_with(|| a.score.discipline.cmp(&b.score.discipline))
    });
    Ok(groups)
}
