//! Query expansion through pseudo-answers, and concreteness scoring of the
//! resulting queries.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eq::parse_list;
use crate::llm::{Gateway, LlmError, PromptRequest, TemplateId};
use crate::model::{ExploratoryQuestion, ResearchTopic};
use crate::scholar::QueryString;
use crate::text;

pub const QUERIES_PER_EQ: usize = 9;
pub const MIN_RATING: f64 = 100.0;
pub const MAX_RATING: f64 = 700.0;
pub const LEXICON_ENV: &str = "MRC_LEXICON_PATH";

const BUNDLED_LEXICON: &str = include_str!("../assets/concreteness.tsv");

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("could not parse a usable answer from the {template} completion")]
    UnparseableCompletion { template: TemplateId },
    #[error("question text is empty")]
    EmptyQuestion,
    #[error("no query word appears in the lexicon")]
    NoCoveredWords,
    #[error("no queries to score")]
    EmptyInput,
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// Terms gathered for one pseudo-answer bullet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermGroup {
    pub bullet: String,
    pub terms: Vec<String>,
}

/// Every stage of one expansion, kept for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryExpansion {
    pub eq_id: String,
    pub pseudo_answers: Vec<String>,
    pub terms: Vec<TermGroup>,
    pub queries: Vec<QueryString>,
    /// Whether a second query prompt was needed.
    pub reprompted: bool,
    /// Number of queries filled in from term combinations.
    pub padded: usize,
}

fn split_terms(line: &str) -> Vec<String> {
    line.split([',', ';'])
        .map(|t| t.trim().trim_matches(['"', '.']).trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn unquote(item: &str) -> &str {
    let t = item.trim();
    match (t.find('"'), t.rfind('"')) {
        (Some(a), Some(b)) if b > a + 1 => &t[a + 1..b],
        _ => t.trim_matches('"'),
    }
}

/// Adds parsed queries to `out`, skipping invalid and repeated ones.
fn absorb_queries(completion: &str, out: &mut Vec<QueryString>, seen: &mut HashSet<String>) {
    for item in parse_list(completion) {
        match QueryString::new(unquote(&item)) {
            Ok(q) => {
                if seen.insert(q.as_str().to_lowercase()) {
                    out.push(q);
                }
            }
            Err(e) => tracing::warn!(%item, error = %e, "skipping invalid query"),
        }
    }
}

fn numbered(groups: &[TermGroup]) -> String {
    groups
        .iter()
        .enumerate()
        .map(|(i, g)| format!("{}. {}", i + 1, g.terms.join(", ")))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Candidate filler queries built from term pairs within each group, then
/// single terms, in group order.
pub fn term_combinations(groups: &[TermGroup]) -> Vec<String> {
    let mut out = Vec::new();
    for g in groups {
        for i in 0..g.terms.len() {
            for j in i + 1..g.terms.len() {
                out.push(format!("{} {}", g.terms[i], g.terms[j]));
            }
        }
    }
    for g in groups {
        out.extend(g.terms.iter().cloned());
    }
    out
}

/// Brings `queries` to exactly nine entries: surplus is cut, shortfall is
/// filled from term combinations and, failing that, by repeating queries.
/// Returns the number of filler queries added.
pub fn normalize_query_count(queries: &mut Vec<QueryString>, groups: &[TermGroup]) -> usize {
    queries.truncate(QUERIES_PER_EQ);
    let before = queries.len();
    let mut seen: HashSet<String> = queries.iter().map(|q| q.as_str().to_lowercase()).collect();
    for candidate in term_combinations(groups) {
        if queries.len() == QUERIES_PER_EQ {
            break;
        }
        if let Ok(q) = QueryString::new(&candidate) {
            if seen.insert(q.as_str().to_lowercase()) {
                queries.push(q);
            }
        }
    }
    let mut i = 0;
    while queries.len() < QUERIES_PER_EQ && i < queries.len() {
        queries.push(queries[i].clone());
        i += 1;
    }
    queries.len() - before
}

/// Pseudo-answers, then terms per answer, then nine keyword queries.
pub async fn expand_queries(
    eq: &ExploratoryQuestion,
    topic: &ResearchTopic,
    gateway: &Gateway,
) -> Result<QueryExpansion, QueryError> {
    if eq.text.trim().is_empty() {
        return Err(QueryError::EmptyQuestion);
    }
    let answers = gateway
        .complete(
            &PromptRequest::new(TemplateId::PseudoAnswers)
                .var("research_idea", &topic.text)
                .var("question", &eq.text),
        )
        .await?;
    let pseudo_answers = parse_list(&answers);
    if pseudo_answers.is_empty() {
        return Err(QueryError::UnparseableCompletion { template: TemplateId::PseudoAnswers });
    }

    let bullets = pseudo_answers
        .iter()
        .map(|a| format!("- {a}"))
        .collect::<Vec<_>>()
        .join("\n");
    let term_lines = parse_list(
        &gateway
            .complete(
                &PromptRequest::new(TemplateId::QueryTerms)
                    .var("question", &eq.text)
                    .var("pseudo_answers", bullets),
            )
            .await?,
    );
    let terms: Vec<TermGroup> = pseudo_answers
        .iter()
        .enumerate()
        .map(|(i, bullet)| TermGroup {
            bullet: bullet.clone(),
            terms: term_lines.get(i).map(|l| split_terms(l)).unwrap_or_default(),
        })
        .collect();
    if terms.iter().all(|g| g.terms.is_empty()) {
        return Err(QueryError::UnparseableCompletion { template: TemplateId::QueryTerms });
    }

    let mut queries = Vec::new();
    let mut seen = HashSet::new();
    let first = PromptRequest::new(TemplateId::SearchQueries)
        .var("question", &eq.text)
        .var("terms", numbered(&terms))
        .var("num_queries", QUERIES_PER_EQ.to_string())
        .var("previous", "(none)");
    absorb_queries(&gateway.complete(&first).await?, &mut queries, &mut seen);

    let mut reprompted = false;
    if queries.len() < QUERIES_PER_EQ {
        reprompted = true;
        let previous = queries
            .iter()
            .map(|q| format!("- \"{q}\""))
            .collect::<Vec<_>>()
            .join("\n");
        let again = PromptRequest::new(TemplateId::SearchQueries)
            .var("question", &eq.text)
            .var("terms", numbered(&terms))
            .var("num_queries", (QUERIES_PER_EQ - queries.len()).to_string())
            .var("previous", if previous.is_empty() { "(none)".to_string() } else { previous });
        absorb_queries(&gateway.complete(&again).await?, &mut queries, &mut seen);
    }
    let padded = normalize_query_count(&mut queries, &terms);
    if padded > 0 {
        tracing::info!(eq = %eq.id, padded, "padded query list from term combinations");
    }

    Ok(QueryExpansion {
        eq_id: eq.id.clone(),
        pseudo_answers,
        terms,
        queries,
        reprompted,
        padded,
    })
}

/// Word concreteness ratings on the 100 to 700 scale.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConcretenessLexicon {
    entries: HashMap<String, f64>,
}

impl ConcretenessLexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self, QueryError> {
        let mut map = HashMap::new();
        for (i, (word, rating)) in entries.into_iter().enumerate() {
            Self::check(&word, rating, i + 1)?;
            map.insert(word, rating);
        }
        Ok(ConcretenessLexicon { entries: map })
    }

    fn check(word: &str, rating: f64, line: usize) -> Result<(), QueryError> {
        if word.is_empty() || word != word.to_lowercase() {
            return Err(QueryError::Lexicon { line, message: format!("word `{word}` is not lowercase") });
        }
        if !(MIN_RATING..=MAX_RATING).contains(&rating) {
            return Err(QueryError::Lexicon { line, message: format!("rating {rating} out of range") });
        }
        Ok(())
    }

    /// Parses `word<TAB>rating` lines; blank lines and `#` comments are
    /// skipped.
    pub fn parse(source: &str) -> Result<Self, QueryError> {
        let mut entries = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, rating) = line.split_once('\t').ok_or_else(|| QueryError::Lexicon {
                line: i + 1,
                message: "expected word<TAB>rating".into(),
            })?;
            let rating: f64 = rating.trim().parse().map_err(|_| QueryError::Lexicon {
                line: i + 1,
                message: format!("bad rating `{rating}`"),
            })?;
            let word = word.trim().to_string();
            Self::check(&word, rating, i + 1)?;
            entries.insert(word, rating);
        }
        Ok(ConcretenessLexicon { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, QueryError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The small lexicon shipped with the crate.
    pub fn bundled() -> &'static ConcretenessLexicon {
        static LEX: OnceLock<ConcretenessLexicon> = OnceLock::new();
        LEX.get_or_init(|| Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid"))
    }

    /// The lexicon named by `MRC_LEXICON_PATH`, else the bundled one.
    pub fn from_env() -> Result<Self, QueryError> {
        match std::env::var(LEXICON_ENV) {
            Ok(path) if !path.is_empty() => Self::load(path),
            _ => Ok(Self::bundled().clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rating of a lowercased word, trying its singular form as well.
    pub fn rating(&self, word: &str) -> Option<f64> {
        self.entries
            .get(word)
            .or_else(|| self.entries.get(&text::fold_plural(word)))
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcretenessScore {
    /// Mean of per-query scores over queries with at least one rated word.
    pub mean: f64,
    /// Sample standard deviation of those per-query scores (0 for one).
    pub sd: f64,
    /// Fraction of all query words found in the lexicon.
    pub coverage: f64,
}

/// Mean rating of the rated words in one query, or `None` if none is rated.
pub fn query_concreteness(query: &str, lexicon: &ConcretenessLexicon) -> Option<f64> {
    let ratings: Vec<f64> = text::tokenize(query)
        .iter()
        .filter_map(|t| lexicon.rating(&t.text))
        .collect();
    (!ratings.is_empty()).then(|| ratings.iter().sum::<f64>() / ratings.len() as f64)
}

pub fn concreteness_score(
    queries: &[QueryString],
    lexicon: &ConcretenessLexicon,
) -> Result<ConcretenessScore, QueryError> {
    if queries.is_empty() {
        return Err(QueryError::EmptyInput);
    }
    let mut words = 0usize;
    let mut covered = 0usize;
    let mut per_query = Vec::new();
    for q in queries {
        let tokens = text::tokenize(q.as_str());
        words += tokens.len();
        covered += tokens.iter().filter(|t| lexicon.rating(&t.text).is_some()).count();
        if let Some(s) = query_concreteness(q.as_str(), lexicon) {
            per_query.push(s);
        }
    }
    if per_query.is_empty() {
        return Err(QueryError::NoCoveredWords);
    }
    let n = per_query.len() as f64;
    let mean = per_query.iter().sum::<f64>() / n;
    let sd = if per_query.len() < 2 {
        0.0
    } else {
        (per_query.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(ConcretenessScore {
        mean,
        sd,
        coverage: covered as f64 / words as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qs(items: &[&str]) -> Vec<QueryString> {
        items.iter().map(|s| QueryString::new(s).unwrap()).collect()
    }

    fn lex(entries: &[(&str, f64)]) -> ConcretenessLexicon {
        ConcretenessLexicon::from_entries(entries.iter().map(|(w, r)| (w.to_string(), *r))).unwrap()
    }

    #[test]
    fn direct_arithmetic() {
        let l = lex(&[("table", 600.0), ("idea", 300.0)]);
        let s = concreteness_score(&qs(&["table idea"]), &l).unwrap();
        assert_eq!((s.mean, s.sd, s.coverage), (450.0, 0.0, 1.0));
        let s = concreteness_score(&qs(&["table", "idea", "tables zzz"]), &l).unwrap();
        assert_eq!(s.mean, 500.0);
        assert!((s.sd - 173.205_080_756_887_7).abs() < 1e-9);
        assert_eq!(s.coverage, 0.75);
    }

    #[test]
    fn degenerate_inputs() {
        let l = lex(&[("table", 600.0)]);
        assert!(matches!(concreteness_score(&qs(&["zzzz"]), &l), Err(QueryError::NoCoveredWords)));
        assert!(matches!(concreteness_score(&[], &l), Err(QueryError::EmptyInput)));
    }

    #[test]
    fn lexicon_parsing() {
        let l = ConcretenessLexicon::parse("# header\ntable\t600\n\nidea\t 300\n").unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.rating("ideas"), Some(300.0));
        assert!(ConcretenessLexicon::parse("Table\t600").is_err());
        assert!(ConcretenessLexicon::parse("table\t800").is_err());
        assert!(ConcretenessLexicon::parse("table 600").is_err());
        assert!(ConcretenessLexicon::bundled().len() > 100);
    }

    fn groups() -> Vec<TermGroup> {
        vec![
            TermGroup { bullet: "b1".into(), terms: vec!["autonomy".into(), "dignity".into(), "consent".into()] },
            TermGroup { bullet: "b2".into(), terms: vec!["privacy".into()] },
        ]
    }

    #[test]
    fn count_normalization() {
        let mut many = qs(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k"]);
        assert_eq!(normalize_query_count(&mut many, &groups()), 0);
        assert_eq!(many.len(), 9);

        let mut few = qs(&["autonomy dignity"]);
        assert_eq!(normalize_query_count(&mut few, &groups()), 8);
        let texts: Vec<&str> = few.iter().map(|q| q.as_str()).collect();
        assert_eq!(
            texts,
            ["autonomy dignity", "autonomy consent", "dignity consent", "autonomy", "dignity", "consent", "privacy", "autonomy dignity", "autonomy consent"]
        );
    }

    #[test]
    fn quoted_queries_are_extracted() {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        absorb_queries("1. \"privacy elderly care robots\"\n2. \"Privacy elderly care robots\"\n3. plain query\n4. \"\"", &mut out, &mut seen);
        let texts: Vec<&str> = out.iter().map(|q| q.as_str()).collect();
        assert_eq!(texts, ["privacy elderly care robots", "plain query"]);
    }

    proptest! {
        #[test]
        fn mean_is_permutation_invariant(idx in prop::collection::vec(0usize..6, 1..12), seed in any::<u64>()) {
            let words = ["table", "idea", "robot", "care", "policy", "zzz"];
            let l = lex(&[("table", 600.0), ("idea", 300.0), ("robot", 620.0), ("care", 350.0), ("policy", 280.0)]);
            let queries: Vec<QueryString> = idx.iter().map(|&i| QueryString::new(&format!("{} {}", words[i], words[(i + 1) % 6])).unwrap()).collect();
            let mut shuffled = queries.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = concreteness_score(&queries, &l).unwrap();
            let b = concreteness_score(&shuffled, &l).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-9);
            prop_assert!((a.sd - b.sd).abs() < 1e-9);
        }
    }
}
