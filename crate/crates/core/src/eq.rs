//! Exploratory question generation: field identification, persona-prompted
//! generation, deduplication and paper-seeded suggestions.

use std::collections::HashSet;

use futures::future::try_join_all;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{Gateway, LlmError, PromptRequest, TemplateId};
use crate::model::{
    validate_eq_text, EqOrigin, ExploratoryQuestion, PaperRecord, ResearchTopic, Vector,
};
use crate::relevance::cosine;
use crate::scholar::DisciplineCatalog;

pub const DEFAULT_MAX_FIELDS: usize = 6;
pub const MAX_FIELDS: usize = 8;
pub const DEFAULT_NUM_RQ: usize = 3;
pub const MAX_NUM_RQ: usize = 10;
pub const PAPER_SEEDED_COUNT: usize = 3;
/// Two questions closer than this are duplicates.
pub const DEDUPE_THRESHOLD: f64 = 0.92;

#[derive(Debug, Error)]
pub enum EqError {
    #[error("could not parse a usable answer from the {template} completion")]
    UnparseableCompletion { template: TemplateId },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// A discipline and one subfield inside it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldPath {
    pub discipline: String,
    pub subfield: String,
}

/// Hands out sequential EQ ids (`eq-1`, `eq-2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EqIdAllocator {
    pub next: u64,
}

impl EqIdAllocator {
    pub fn next_id(&mut self) -> String {
        self.next += 1;
        format!("eq-{}", self.next)
    }
}

/// Prompt used for topic-seeded generation. The ablation variants are kept
/// for evaluation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqPrompt {
    #[default]
    Persona,
    NoPersona,
    NoSimplification,
}

impl EqPrompt {
    pub fn template(self) -> TemplateId {
        match self {
            EqPrompt::Persona => TemplateId::EqGeneration,
            EqPrompt::NoPersona => TemplateId::EqGenerationNoPersona,
            EqPrompt::NoSimplification => TemplateId::EqGenerationNoSimplification,
        }
    }
}

/// Strips a leading list marker (`-`, `*`, `•`, `1.` or `1)`).
fn strip_marker(line: &str) -> Option<&str> {
    let line = line.trim();
    if let Some(rest) = line.strip_prefix(['-', '*', '•']) {
        return Some(rest.trim());
    }
    let digits = line.len() - line.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        if let Some(rest) = line[digits..].strip_prefix(['.', ')']) {
            return Some(rest.trim());
        }
    }
    None
}

/// Items of a bulleted or numbered list; other lines are ignored.
pub fn parse_list(completion: &str) -> Vec<String> {
    completion
        .lines()
        .filter_map(strip_marker)
        .map(|s| s.trim_matches(['"', '*']).trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Splits a `Label: rest` item. The label must be short and not itself
/// contain sentence punctuation.
fn split_labeled(item: &str) -> Option<(&str, &str)> {
    let (label, rest) = item.split_once(':')?;
    let label = label.trim().trim_matches('*').trim();
    let rest = rest.trim();
    if label.is_empty() || rest.is_empty() || label.contains(['?', '.']) {
        return None;
    }
    Some((label, rest))
}

fn disciplines_listing(catalog: &DisciplineCatalog) -> String {
    catalog
        .names()
        .iter()
        .map(|n| format!("- {n}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses `- Discipline: subfield` lines, keeping catalog disciplines only.
pub fn parse_fields(completion: &str, catalog: &DisciplineCatalog, max_fields: usize) -> Vec<FieldPath> {
    let mut out: Vec<FieldPath> = Vec::new();
    for item in parse_list(completion) {
        let Some((label, subfield)) = split_labeled(&item) else {
            tracing::warn!(%item, "field line without `Discipline: subfield` shape");
            continue;
        };
        let Some(discipline) = catalog.canonical(label) else {
            tracing::warn!(discipline = label, "dropping field outside the discipline list");
            continue;
        };
        let path = FieldPath {
            discipline: discipline.to_string(),
            subfield: subfield.to_string(),
        };
        if !out.contains(&path) {
            out.push(path);
        }
    }
    out.truncate(max_fields);
    out
}

/// Asks which disciplines, and which subfield of each, bear on the topic.
pub async fn identify_fields(
    topic: &ResearchTopic,
    catalog: &DisciplineCatalog,
    max_fields: usize,
    gateway: &Gateway,
) -> Result<Vec<FieldPath>, EqError> {
    if !(1..=MAX_FIELDS).contains(&max_fields) {
        return Err(EqError::InvalidArgument(format!("max_fields {max_fields} not in 1..={MAX_FIELDS}")));
    }
    let request = PromptRequest::new(TemplateId::IdentifyFields)
        .var("research_idea", &topic.text)
        .var("disciplines", disciplines_listing(catalog))
        .var("max_fields", max_fields.to_string());
    let completion = gateway.complete(&request).await?;
    let fields = parse_fields(&completion, catalog, max_fields);
    if fields.is_empty() {
        return Err(EqError::UnparseableCompletion { template: TemplateId::IdentifyFields });
    }
    Ok(fields)
}

fn make_eq(id: String, text: &str, discipline: &str, subfield: Option<&str>, origin: EqOrigin) -> ExploratoryQuestion {
    ExploratoryQuestion {
        id,
        text: text.to_string(),
        discipline: discipline.to_string(),
        subfield: subfield.map(str::to_string),
        origin,
        selected: false,
        issues: validate_eq_text(text),
    }
}

async fn eq_texts(
    topic: &ResearchTopic,
    field: &FieldPath,
    num_rq: usize,
    prompt: EqPrompt,
    gateway: &Gateway,
) -> Result<Vec<String>, EqError> {
    if !(1..=MAX_NUM_RQ).contains(&num_rq) {
        return Err(EqError::InvalidArgument(format!("num_rq {num_rq} not in 1..={MAX_NUM_RQ}")));
    }
    let template = prompt.template();
    let request = PromptRequest::new(template)
        .var("field", &field.subfield)
        .var("research_idea", &topic.text)
        .var("num_rq", num_rq.to_string());
    let mut texts = parse_list(&gateway.complete(&request).await?);
    if texts.is_empty() {
        return Err(EqError::UnparseableCompletion { template });
    }
    texts.truncate(num_rq);
    Ok(texts)
}

/// Generates up to `num_rq` questions from the viewpoint of an expert in
/// `field`. Questions failing validation are flagged, not dropped.
pub async fn generate_eqs(
    topic: &ResearchTopic,
    field: &FieldPath,
    num_rq: usize,
    prompt: EqPrompt,
    ids: &mut EqIdAllocator,
    gateway: &Gateway,
) -> Result<Vec<ExploratoryQuestion>, EqError> {
    let texts = eq_texts(topic, field, num_rq, prompt, gateway).await?;
    Ok(texts
        .iter()
        .map(|t| make_eq(ids.next_id(), t, &field.discipline, Some(&field.subfield), EqOrigin::TopicSeeded))
        .collect())
}

/// Field identification, per-field generation (concurrently) and a final
/// dedupe pass.
pub async fn generate_topic_eqs(
    topic: &ResearchTopic,
    catalog: &DisciplineCatalog,
    max_fields: usize,
    num_rq: usize,
    ids: &mut EqIdAllocator,
    gateway: &Gateway,
) -> Result<Vec<ExploratoryQuestion>, EqError> {
    let fields = identify_fields(topic, catalog, max_fields, gateway).await?;
    let batches = try_join_all(
        fields
            .iter()
            .map(|f| eq_texts(topic, f, num_rq, EqPrompt::Persona, gateway)),
    )
    .await?;
    let mut eqs = Vec::new();
    for (field, texts) in fields.iter().zip(batches) {
        for t in texts {
            eqs.push(make_eq(ids.next_id(), &t, &field.discipline, Some(&field.subfield), EqOrigin::TopicSeeded));
        }
    }
    dedupe_eqs(&eqs, gateway).await
}

/// Lowercased text with collapsed whitespace, used for exact matching.
pub fn normalized_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Greedy first-occurrence dedupe over precomputed vectors: an item is kept
/// unless its normalized text repeats a kept one or its similarity to a
/// kept one exceeds `threshold`. Returns kept indices.
pub fn dedupe_indices(texts: &[&str], vectors: &[Vector], threshold: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut seen = HashSet::new();
    for (i, t) in texts.iter().enumerate() {
        let norm = normalized_text(t);
        if seen.contains(&norm) {
            continue;
        }
        let dup = kept
            .iter()
            .any(|&k| cosine(&vectors[k], &vectors[i]).is_ok_and(|s| s > threshold));
        if !dup {
            seen.insert(norm);
            kept.push(i);
        }
    }
    kept
}

pub async fn dedupe_eqs(
    eqs: &[ExploratoryQuestion],
    gateway: &Gateway,
) -> Result<Vec<ExploratoryQuestion>, EqError> {
    if eqs.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<String> = eqs.iter().map(|e| e.text.clone()).collect();
    let vectors = gateway.embed(&texts).await?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    Ok(dedupe_indices(&refs, &vectors, DEDUPE_THRESHOLD)
        .into_iter()
        .map(|i| eqs[i].clone())
        .collect())
}

/// Dedupe delegated to the LLM. Exact duplicates are removed first; the
/// completion lists the 1-based numbers to keep.
pub async fn dedupe_eqs_llm(
    eqs: &[ExploratoryQuestion],
    gateway: &Gateway,
) -> Result<Vec<ExploratoryQuestion>, EqError> {
    let mut seen = HashSet::new();
    let unique: Vec<&ExploratoryQuestion> =
        eqs.iter().filter(|e| seen.insert(normalized_text(&e.text))).collect();
    if unique.len() < 2 {
        return Ok(unique.into_iter().cloned().collect());
    }
    let listing = unique
        .iter()
        .enumerate()
        .map(|(i, e)| format!("{}. {}", i + 1, e.text))
        .collect::<Vec<_>>()
        .join("\n");
    let completion = gateway
        .complete(&PromptRequest::new(TemplateId::EqDedupe).var("questions", listing))
        .await?;
    let mut keep: Vec<usize> = completion
        .split(|c: char| !c.is_ascii_digit())
        .filter_map(|n| n.parse::<usize>().ok())
        .filter(|n| (1..=unique.len()).contains(n))
        .collect();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(EqError::UnparseableCompletion { template: TemplateId::EqDedupe });
    }
    Ok(keep.into_iter().map(|n| unique[n - 1].clone()).collect())
}

fn bullet_lines(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".to_string()
    } else {
        items.iter().map(|t| format!("- {t}")).collect::<Vec<_>>().join("\n")
    }
}

/// Parses `- Discipline: question` items. Unknown disciplines fall back to
/// the paper's first discipline.
fn parse_paper_eqs(completion: &str, catalog: &DisciplineCatalog, paper: &PaperRecord) -> Vec<(String, String)> {
    let fallback = paper.effective_disciplines()[0].clone();
    parse_list(completion)
        .into_iter()
        .map(|item| match split_labeled(&item) {
            Some((label, q)) => match catalog.canonical(label) {
                Some(d) => (d.to_string(), q.to_string()),
                None => (fallback.clone(), q.to_string()),
            },
            None => (fallback.clone(), item),
        })
        .collect()
}

/// Suggests questions connecting `paper` to the topic. New questions that
/// duplicate `existing` (or each other) are dropped; when fewer than three
/// survive the prompt is repeated once with the survivors added to the
/// avoid list.
pub async fn eqs_from_paper(
    paper: &PaperRecord,
    focus_keywords: &[String],
    topic: &ResearchTopic,
    existing: &[ExploratoryQuestion],
    catalog: &DisciplineCatalog,
    ids: &mut EqIdAllocator,
    gateway: &Gateway,
) -> Result<Vec<ExploratoryQuestion>, EqError> {
    if paper.title.trim().is_empty() {
        return Err(EqError::InvalidArgument("paper has an empty title".into()));
    }
    let keywords = focus_keywords
        .iter()
        .map(|k| k.trim())
        .filter(|k| !k.is_empty())
        .collect::<Vec<_>>()
        .join(", ");
    let mut accepted: Vec<(String, String)> = Vec::new();
    for attempt in 0..2 {
        let mut avoid: Vec<String> = existing.iter().map(|e| e.text.clone()).collect();
        avoid.extend(accepted.iter().map(|(_, q)| q.clone()));
        let request = PromptRequest::new(TemplateId::EqFromPaper)
            .var("research_idea", &topic.text)
            .var("title", &paper.title)
            .var("abstract", if paper.abstract_text.is_empty() { "(none)" } else { &paper.abstract_text })
            .var("paper_fields", paper.effective_disciplines().join(", "))
            .var("keywords", if keywords.is_empty() { "(none)" } else { &keywords })
            .var("disciplines", disciplines_listing(catalog))
            .var("num_rq", PAPER_SEEDED_COUNT.to_string())
            .var("avoid", bullet_lines(&avoid));
        let candidates = parse_paper_eqs(&gateway.complete(&request).await?, catalog, paper);
        if candidates.is_empty() && attempt == 0 && accepted.is_empty() {
            return Err(EqError::UnparseableCompletion { template: TemplateId::EqFromPaper });
        }
        let mut texts: Vec<String> = existing.iter().map(|e| e.text.clone()).collect();
        texts.extend(accepted.iter().map(|(_, q)| q.clone()));
        let fixed = texts.len();
        texts.extend(candidates.iter().map(|(_, q)| q.clone()));
        let vectors = gateway.embed(&texts).await?;
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        for i in dedupe_indices(&refs, &vectors, DEDUPE_THRESHOLD) {
            if i >= fixed && accepted.len() < PAPER_SEEDED_COUNT {
                accepted.push(candidates[i - fixed].clone());
            }
        }
        if accepted.len() >= PAPER_SEEDED_COUNT {
            break;
        }
        tracing::info!(kept = accepted.len(), "paper-seeded questions duplicated existing ones");
    }
    Ok(accepted
        .iter()
        .map(|(d, q)| make_eq(ids.next_id(), q, d, None, EqOrigin::PaperSeeded))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scholar::DEFAULT_DISCIPLINES;
    use proptest::prelude::*;

    fn catalog() -> DisciplineCatalog {
        DisciplineCatalog::new(DEFAULT_DISCIPLINES.iter().map(|s| s.to_string()))
    }

    #[test]
    fn list_parsing() {
        let c = "Here are some:\n- First?\n2) Second?\n* \"Third?\"\n\n10. Tenth?\nplain line";
        assert_eq!(parse_list(c), ["First?", "Second?", "Third?", "Tenth?"]);
        assert!(parse_list("nothing here").is_empty());
    }

    #[test]
    fn field_parsing_drops_unknown_disciplines() {
        let c = "- Psychology: cognitive psychology\n- Astrology: horoscopes\n- education: adult education\n- Psychology: cognitive psychology\n- Sociology:";
        let f = parse_fields(c, &catalog(), 6);
        assert_eq!(
            f,
            [
                FieldPath { discipline: "Psychology".into(), subfield: "cognitive psychology".into() },
                FieldPath { discipline: "Education".into(), subfield: "adult education".into() },
            ]
        );
        assert!(parse_fields("- Astrology: stars", &catalog(), 6).is_empty());
        assert_eq!(parse_fields(c, &catalog(), 1).len(), 1);
    }

    #[test]
    fn ids_are_sequential() {
        let mut ids = EqIdAllocator::default();
        assert_eq!(ids.next_id(), "eq-1");
        assert_eq!(ids.next_id(), "eq-2");
    }

    /// Unit vectors in a plane at a chosen similarity to the x axis.
    fn at(s: f64) -> Vector {
        Vector(vec![s, (1.0 - s * s).sqrt()])
    }

    #[test]
    fn dedupe_threshold_and_exact_text() {
        let base = Vector(vec![1.0, 0.0]);
        assert!(dedupe_indices(&[], &[], DEDUPE_THRESHOLD).is_empty());
        assert_eq!(dedupe_indices(&["a?", "b?"], &[base.clone(), at(0.95)], DEDUPE_THRESHOLD), [0]);
        assert_eq!(dedupe_indices(&["a?", "b?"], &[base.clone(), at(0.80)], DEDUPE_THRESHOLD), [0, 1]);
        // identical text is dropped even with distant vectors
        assert_eq!(
            dedupe_indices(&["Same  question?", "same question?"], &[base, at(0.0)], DEDUPE_THRESHOLD),
            [0]
        );
    }

    #[test]
    fn paper_eq_parsing_falls_back_to_paper_discipline() {
        let paper = PaperRecord {
            paper_id: "p".into(),
            title: "T".into(),
            abstract_text: String::new(),
            disciplines: vec!["Medicine".into()],
            year: None,
            venue: None,
            authors: vec![],
            citation_count: 0,
        };
        let parsed = parse_paper_eqs("- Psychology: Why?\n- Nowhere: How?\n- What now?", &catalog(), &paper);
        assert_eq!(
            parsed,
            [
                ("Psychology".to_string(), "Why?".to_string()),
                ("Medicine".into(), "How?".into()),
                ("Medicine".into(), "What now?".into()),
            ]
        );
    }

    proptest! {
        #[test]
        fn dedupe_is_idempotent(
            raw in prop::collection::vec((0usize..4, prop::collection::vec(-1.0f64..1.0, 3)), 0..25)
        ) {
            let texts: Vec<String> = raw.iter().map(|(t, _)| format!("question {t}?")).collect();
            let vectors: Vec<Vector> = raw.iter().map(|(_, v)| Vector(v.clone())).collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let once = dedupe_indices(&refs, &vectors, DEDUPE_THRESHOLD);
            let t2: Vec<&str> = once.iter().map(|&i| refs[i]).collect();
            let v2: Vec<Vector> = once.iter().map(|&i| vectors[i].clone()).collect();
            let twice = dedupe_indices(&t2, &v2, DEDUPE_THRESHOLD);
            prop_assert_eq!(twice, (0..once.len()).collect::<Vec<_>>());
        }
    }
}
