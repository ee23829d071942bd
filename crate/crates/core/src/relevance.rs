//! Relevance math shared by theming, highlighting and ranking.
//!
//! A phrase is relevant to an exploration context when its embedding's
//! cosine similarity with at least one context concept strictly exceeds
//! `tau`. Relevant phrases feed three consumers: the keyphrase segment of a
//! paper's contextual embedding, the highlight spans shown on a paper card,
//! and key-sentence selection.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{Gateway, LlmError};
use crate::model::{ExplorationContext, PaperRecord, Vector};
use crate::text;

pub use crate::text::extract_concepts;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelevanceError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine of a zero vector")]
    ZeroVector,
    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),
    #[error("invalid relevance config: {0}")]
    InvalidConfig(String),
    #[error("key sentence needs at least one sentence")]
    EmptyDocument,
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceConfig {
    pub tau: f64,
    /// Weights of the (text, discipline, keyphrase) segments.
    pub segment_weights: [f64; 3],
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        RelevanceConfig {
            tau: 0.6,
            segment_weights: [1.0, 1.0, 1.0],
        }
    }
}

impl RelevanceConfig {
    pub fn with_tau(tau: f64) -> Self {
        RelevanceConfig {
            tau,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), RelevanceError> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(RelevanceError::InvalidConfig(format!("tau {} not in (0, 1)", self.tau)));
        }
        if self.segment_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(RelevanceError::InvalidConfig("negative segment weight".into()));
        }
        if self.segment_weights.iter().all(|w| *w == 0.0) {
            return Err(RelevanceError::InvalidConfig("all segment weights are zero".into()));
        }
        Ok(())
    }
}

pub fn cosine(a: &Vector, b: &Vector) -> Result<f64, RelevanceError> {
    if a.dim() != b.dim() {
        return Err(RelevanceError::DimensionMismatch(a.dim(), b.dim()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(RelevanceError::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Text-to-embedding lookup filled lazily from the gateway.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    vectors: HashMap<String, Vector>,
}

impl EmbeddingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, text: impl Into<String>, vector: Vector) {
        self.vectors.insert(text.into(), vector);
    }

    pub fn get(&self, text: &str) -> Result<&Vector, RelevanceError> {
        self.vectors
            .get(text)
            .ok_or_else(|| RelevanceError::MissingEmbedding(text.to_string()))
    }

    pub fn contains(&self, text: &str) -> bool {
        self.vectors.contains_key(text)
    }

    /// Embeds every text not yet in the table with a single gateway call.
    pub async fn ensure<'a>(
        &mut self,
        gateway: &Gateway,
        texts: impl IntoIterator<Item = &'a String>,
    ) -> Result<(), RelevanceError> {
        let mut missing: Vec<String> = Vec::new();
        for t in texts {
            if !self.vectors.contains_key(t) && !missing.contains(t) {
                missing.push(t.clone());
            }
        }
        if missing.is_empty() {
            return Ok(());
        }
        let vectors = gateway.embed(&missing).await?;
        for (t, v) in missing.into_iter().zip(vectors) {
            self.vectors.insert(t, v);
        }
        Ok(())
    }
}

/// Highest similarity between `phrase` and any concept; `None` when there
/// are no concepts.
fn best_similarity(
    phrase: &Vector,
    concepts: &[&Vector],
) -> Result<Option<f64>, RelevanceError> {
    let mut best: Option<f64> = None;
    for c in concepts {
        let s = cosine(c, phrase)?;
        best = Some(best.map_or(s, |b: f64| b.max(s)));
    }
    Ok(best)
}

/// Returns `{ p in phrases : max_c cos(v_c, v_p) > tau }`, in input order.
pub fn relevant_phrases(
    concepts: &[String],
    phrases: &[String],
    table: &EmbeddingTable,
    config: &RelevanceConfig,
) -> Result<Vec<String>, RelevanceError> {
    let concept_vecs = concepts
        .iter()
        .map(|c| table.get(c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for p in phrases {
        let v = table.get(p)?;
        if best_similarity(v, &concept_vecs)?.is_some_and(|s| s > config.tau) {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// A paper vector built from three equally sized segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualEmbedding {
    pub text_segment: Vector,
    pub discipline_segment: Vector,
    pub keyphrase_segment: Vector,
    pub combined: Vector,
}

/// Assembles the segments: each non-zero segment is L2-normalized, scaled by
/// its weight, and the three are concatenated.
pub fn assemble_embedding(
    text: &Vector,
    discipline: Option<&Vector>,
    relevant: &[&Vector],
    config: &RelevanceConfig,
) -> ContextualEmbedding {
    let dim = text.dim();
    let [wt, wd, wk] = config.segment_weights;
    let text_segment = text.normalized().scaled(wt);
    let discipline_segment = match discipline {
        Some(v) => v.normalized().scaled(wd),
        None => Vector::zeros(dim),
    };
    let keyphrase_segment = match Vector::mean(relevant.iter().copied()) {
        Some(mean) if !mean.is_zero() => mean.normalized().scaled(wk),
        _ => Vector::zeros(dim),
    };
    let combined = Vector::concat([&text_segment, &discipline_segment, &keyphrase_segment]);
    ContextualEmbedding {
        text_segment,
        discipline_segment,
        keyphrase_segment,
        combined,
    }
}

/// Phrase set of a paper's metadata (title and abstract).
pub fn paper_phrases(paper: &PaperRecord) -> Vec<String> {
    let mut phrases = text::extract_concepts(&paper.title);
    for p in text::extract_concepts(&paper.abstract_text) {
        if !phrases.contains(&p) {
            phrases.push(p);
        }
    }
    phrases
}

/// Contextual embedding of one paper plus the relevant phrases used for its
/// keyphrase segment. The table must already hold the paper text, its
/// phrases, the context concepts and the EQ's discipline name.
pub fn contextual_embedding_with(
    paper: &PaperRecord,
    context: &ExplorationContext,
    table: &EmbeddingTable,
    config: &RelevanceConfig,
) -> Result<(ContextualEmbedding, Vec<String>), RelevanceError> {
    let text_vec = table.get(&paper.metadata_text())?;
    let discipline = if paper.has_discipline(&context.eq.discipline) {
        Some(table.get(&context.eq.discipline)?)
    } else {
        None
    };
    let relevant = relevant_phrases(&context.concepts, &paper_phrases(paper), table, config)?;
    let vecs = relevant
        .iter()
        .map(|p| table.get(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((assemble_embedding(text_vec, discipline, &vecs, config), relevant))
}

/// Fetches every embedding [`contextual_embedding_with`] needs for `papers`.
pub async fn prepare_embeddings(
    papers: &[PaperRecord],
    context: &ExplorationContext,
    table: &mut EmbeddingTable,
    gateway: &Gateway,
) -> Result<(), RelevanceError> {
    let mut texts: Vec<String> = context.concepts.clone();
    texts.push(context.eq.discipline.clone());
    for p in papers {
        texts.push(p.metadata_text());
        texts.extend(paper_phrases(p));
    }
    table.ensure(gateway, texts.iter()).await
}

pub async fn contextual_embedding(
    paper: &PaperRecord,
    context: &ExplorationContext,
    config: &RelevanceConfig,
    gateway: &Gateway,
) -> Result<ContextualEmbedding, RelevanceError> {
    let mut table = EmbeddingTable::new();
    prepare_embeddings(std::slice::from_ref(paper), context, &mut table, gateway).await?;
    Ok(contextual_embedding_with(paper, context, &table, config)?.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySentenceResult {
    pub sentence_index: usize,
    pub sentence: String,
    pub covered_concepts: Vec<String>,
}

/// Concepts having at least one relevant phrase in `sentence`.
pub fn covered_concepts(
    sentence: &str,
    concepts: &[String],
    table: &EmbeddingTable,
    config: &RelevanceConfig,
) -> Result<Vec<String>, RelevanceError> {
    let phrases = text::extract_concepts(sentence);
    let phrase_vecs = phrases
        .iter()
        .map(|p| table.get(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut covered = Vec::new();
    for c in concepts {
        let cv = table.get(c)?;
        for pv in &phrase_vecs {
            if cosine(cv, pv)? > config.tau {
                covered.push(c.clone());
                break;
            }
        }
    }
    Ok(covered)
}

/// The sentence covering the most concepts; ties go to the earliest.
pub fn key_sentence(
    sentences: &[String],
    concepts: &[String],
    table: &EmbeddingTable,
    config: &RelevanceConfig,
) -> Result<KeySentenceResult, RelevanceError> {
    let mut best: Option<KeySentenceResult> = None;
    for (i, s) in sentences.iter().enumerate() {
        let covered = covered_concepts(s, concepts, table, config)?;
        if best
            .as_ref()
            .is_none_or(|b| covered.len() > b.covered_concepts.len())
        {
            best = Some(KeySentenceResult {
                sentence_index: i,
                sentence: s.clone(),
                covered_concepts: covered,
            });
        }
    }
    best.ok_or(RelevanceError::EmptyDocument)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextField {
    Title,
    Abstract,
}

/// Byte range of a relevant phrase inside the title or abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub field: TextField,
    pub start: usize,
    pub end: usize,
    pub phrase: String,
}

/// Relevance cues for one paper under one exploration context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperAnnotation {
    pub relevant_phrases: Vec<String>,
    pub highlights: Vec<Highlight>,
    pub sentences: Vec<String>,
    /// `None` when the abstract is empty.
    pub key_sentence_index: Option<usize>,
}

/// Highlights and key sentence of `paper`. The table must hold the context
/// concepts and every phrase of the title and abstract.
pub fn annotate_paper(
    paper: &PaperRecord,
    context: &ExplorationContext,
    table: &EmbeddingTable,
    config: &RelevanceConfig,
) -> Result<PaperAnnotation, RelevanceError> {
    let relevant = relevant_phrases(&context.concepts, &paper_phrases(paper), table, config)?;
    let mut highlights = Vec::new();
    for (field, source) in [
        (TextField::Title, &paper.title),
        (TextField::Abstract, &paper.abstract_text),
    ] {
        for span in text::phrase_spans(source) {
            if relevant.contains(&span.text) {
                highlights.push(Highlight {
                    field,
                    start: span.span.start,
                    end: span.span.end,
                    phrase: span.text,
                });
            }
        }
    }
    let sentences = text::split_sentences(&paper.abstract_text);
    let key_sentence_index = if sentences.is_empty() {
        None
    } else {
        Some(key_sentence(&sentences, &context.concepts, table, config)?.sentence_index)
    };
    Ok(PaperAnnotation {
        relevant_phrases: relevant,
        highlights,
        sentences,
        key_sentence_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_topic, EqOrigin, ExploratoryQuestion};
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector(x.to_vec())
    }

    /// Unit vector in the plane at similarity `s` with (1, 0, 0).
    fn at_similarity(s: f64) -> Vector {
        v(&[s, (1.0 - s * s).sqrt(), 0.0])
    }

    #[test]
    fn cosine_identity_orthogonal_antipodal() {
        let a = v(&[0.3, -1.2, 4.0]);
        assert!((cosine(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap(), -1.0);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(RelevanceError::DimensionMismatch(1, 2))
        );
        assert_eq!(cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(RelevanceError::ZeroVector));
    }

    #[test]
    fn config_validation() {
        assert!(RelevanceConfig::default().validate().is_ok());
        assert!(RelevanceConfig::with_tau(1.0).validate().is_err());
        assert!(RelevanceConfig::with_tau(0.0).validate().is_err());
        let mut c = RelevanceConfig::default();
        c.segment_weights = [0.0; 3];
        assert!(c.validate().is_err());
        c.segment_weights = [1.0, -1.0, 0.0];
        assert!(c.validate().is_err());
    }

    fn table(entries: &[(&str, Vector)]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new();
        for (k, vec) in entries {
            t.insert(*k, vec.clone());
        }
        t
    }

    #[test]
    fn threshold_is_strict_and_uses_max_over_concepts() {
        let t = table(&[
            ("c", v(&[1.0, 0.0, 0.0])),
            ("c2", v(&[0.0, 0.0, 1.0])),
            ("p1", at_similarity(0.61)),
            ("p2", at_similarity(0.59)),
            ("p3", v(&[0.0, 0.1, 1.0])),
            ("p4", at_similarity(0.6)),
        ]);
        let cfg = RelevanceConfig::default();
        let phrases: Vec<String> = ["p1", "p2", "p4"].iter().map(|s| s.to_string()).collect();
        assert_eq!(relevant_phrases(&["c".into()], &phrases, &t, &cfg).unwrap(), ["p1"]);
        let both = vec!["c".to_string(), "c2".to_string()];
        assert_eq!(relevant_phrases(&both, &["p3".into()], &t, &cfg).unwrap(), ["p3"]);
        assert!(relevant_phrases(&both, &[], &t, &cfg).unwrap().is_empty());
        assert_eq!(
            relevant_phrases(&["c".into()], &["zz".into()], &t, &cfg),
            Err(RelevanceError::MissingEmbedding("zz".into()))
        );
    }

    #[test]
    fn assemble_segments() {
        let cfg = RelevanceConfig::default();
        let text = v(&[3.0, 4.0]);
        let e = assemble_embedding(&text, None, &[], &cfg);
        assert!(e.discipline_segment.is_zero());
        assert!(e.keyphrase_segment.is_zero());
        assert_eq!(e.combined.dim(), 6);
        assert!((e.text_segment.norm() - 1.0).abs() < 1e-12);

        let d = v(&[0.0, 2.0]);
        let k1 = v(&[1.0, 0.0]);
        let k2 = v(&[0.0, 1.0]);
        let e2 = assemble_embedding(&text, Some(&d), &[&k1, &k2], &cfg);
        assert_eq!(e2.discipline_segment, v(&[0.0, 1.0]));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e2.keyphrase_segment.0[0] - h).abs() < 1e-12);
        assert_eq!(&e2.combined.0[..2], &e.combined.0[..2]);
    }

    fn context() -> ExplorationContext {
        let topic = normalize_topic("older adults").unwrap();
        let eq = ExploratoryQuestion {
            id: "eq-1".into(),
            text: "Why does misinformation spread?".into(),
            discipline: "Psychology".into(),
            subfield: None,
            origin: EqOrigin::TopicSeeded,
            selected: true,
            issues: vec![],
        };
        ExplorationContext::new(topic, eq)
    }

    fn paper(disciplines: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: "p".into(),
            title: "Misinformation and older adults".into(),
            abstract_text: "We survey seniors. Misinformation spread is common among older adults."
                .into(),
            disciplines: disciplines.iter().map(|s| s.to_string()).collect(),
            year: Some(2020),
            venue: None,
            authors: vec![],
            citation_count: 0,
        }
    }

    fn scripted_table(p: &PaperRecord, ctx: &ExplorationContext) -> EmbeddingTable {
        let mut t = EmbeddingTable::new();
        let mut texts = ctx.concepts.clone();
        texts.push(ctx.eq.discipline.clone());
        texts.push(p.metadata_text());
        texts.extend(paper_phrases(p));
        for s in text::split_sentences(&p.abstract_text) {
            texts.extend(text::extract_concepts(&s));
        }
        for x in texts {
            let vec = crate::llm::scripted_embedding(&x);
            t.insert(x, vec);
        }
        t
    }

    #[test]
    fn discipline_match_only_changes_middle_segment() {
        let ctx = context();
        let cfg = RelevanceConfig::default();
        let a = paper(&["Psychology"]);
        let b = paper(&["Sociology"]);
        let t = scripted_table(&a, &ctx);
        let (ea, _) = contextual_embedding_with(&a, &ctx, &t, &cfg).unwrap();
        let (eb, _) = contextual_embedding_with(&b, &ctx, &t, &cfg).unwrap();
        assert_eq!(ea.text_segment, eb.text_segment);
        assert_eq!(ea.keyphrase_segment, eb.keyphrase_segment);
        assert!(eb.discipline_segment.is_zero());
        assert!(!ea.discipline_segment.is_zero());
        let dim = ea.text_segment.dim();
        for i in 0..3 * dim {
            let same = ea.combined.0[i] == eb.combined.0[i];
            assert_eq!(same, !(dim..2 * dim).contains(&i) || ea.combined.0[i] == 0.0, "index {i}");
        }
    }

    #[test]
    fn no_relevant_phrase_gives_zero_keyphrase_segment() {
        let ctx = context();
        let mut p = paper(&[]);
        p.title = "Quantum chromodynamics lattice".into();
        p.abstract_text = "Gluon fields on lattices.".into();
        let t = scripted_table(&p, &ctx);
        let (e, relevant) = contextual_embedding_with(&p, &ctx, &t, &RelevanceConfig::default()).unwrap();
        assert!(relevant.is_empty());
        assert!(e.keyphrase_segment.is_zero());
    }

    #[test]
    fn annotation_highlights_and_key_sentence() {
        let ctx = context();
        let p = paper(&["Psychology"]);
        let t = scripted_table(&p, &ctx);
        let ann = annotate_paper(&p, &ctx, &t, &RelevanceConfig::default()).unwrap();
        assert_eq!(ann.sentences.len(), 2);
        assert_eq!(ann.key_sentence_index, Some(1));
        let title_marks: Vec<&str> = ann
            .highlights
            .iter()
            .filter(|h| h.field == TextField::Title)
            .map(|h| &p.title[h.start..h.end])
            .collect();
        assert_eq!(title_marks, ["Misinformation", "older adults"]);
    }

    fn coverage_table(n: usize) -> (EmbeddingTable, Vec<String>) {
        // concepts c0..cn are orthogonal axes; phrase "ci" equals concept i
        let mut t = EmbeddingTable::new();
        let mut concepts = Vec::new();
        for i in 0..n {
            let mut x = vec![0.0; n + 1];
            x[i] = 1.0;
            t.insert(format!("c{i}"), Vector(x));
            concepts.push(format!("c{i}"));
        }
        let mut other = vec![0.0; n + 1];
        other[n] = 1.0;
        t.insert("filler", Vector(other));
        (t, concepts)
    }

    #[test]
    fn key_sentence_strict_argmax_and_ties() {
        let (t, concepts) = coverage_table(3);
        let cfg = RelevanceConfig::default();
        let d = vec!["c0, c1".to_string(), "c0".to_string()];
        let r = key_sentence(&d, &concepts, &t, &cfg).unwrap();
        assert_eq!(r.sentence_index, 0);
        assert_eq!(r.covered_concepts, ["c0", "c1"]);

        let none = vec!["filler".to_string(), "filler".to_string()];
        let r = key_sentence(&none, &concepts, &t, &cfg).unwrap();
        assert_eq!(r.sentence_index, 0);
        assert!(r.covered_concepts.is_empty());

        let tie = vec!["c2".to_string(), "c0, c1".to_string(), "c1, c2".to_string()];
        assert_eq!(key_sentence(&tie, &concepts, &t, &cfg).unwrap().sentence_index, 1);
        assert_eq!(key_sentence(&[], &concepts, &t, &cfg), Err(RelevanceError::EmptyDocument));
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric(a in prop::collection::vec(-10.0f64..10.0, 4), b in prop::collection::vec(-10.0f64..10.0, 4)) {
            let (a, b) = (Vector(a), Vector(b));
            match (cosine(&a, &b), cosine(&b, &a)) {
                (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12 && (-1.0..=1.0).contains(&x)),
                (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
                _ => prop_assert!(false),
            }
        }
    }
}
