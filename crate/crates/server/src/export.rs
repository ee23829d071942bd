//! Outline export: collections become topics listing their papers.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use coexplore_core::session::{CollectionSource, SessionState};
use coexplore_core::theming::top_keyphrases;

pub const OUTLINE_SCHEMA_VERSION: u32 = 1;
/// JSON Schema describing [`OutlineDocument`].
pub const OUTLINE_SCHEMA: &str = include_str!("../schema/outline.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    Markdown,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "markdown" | "md" => Ok(ExportFormat::Markdown),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlinePaper {
    pub paper_id: String,
    pub title: String,
    pub year: Option<i32>,
    pub venue: Option<String>,
    pub disciplines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineTopic {
    pub title: String,
    pub source: String,
    pub keyphrases: Vec<String>,
    pub papers: Vec<OutlinePaper>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineDocument {
    pub schema_version: u32,
    pub research_topic: String,
    pub questions: Vec<OutlineQuestion>,
    pub topics: Vec<OutlineTopic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineQuestion {
    pub text: String,
    pub discipline: String,
    pub explored: bool,
}

/// Keyphrases of a collection: the theme's own list when it came from a
/// theme, otherwise the most frequent relevant phrases of its papers.
fn collection_keyphrases(state: &SessionState, source: &CollectionSource, paper_ids: &[String]) -> Vec<String> {
    if let CollectionSource::FromTheme { theme_id } = source {
        if let Some(theme) = state.find_theme(theme_id) {
            return theme.keyphrases.clone();
        }
    }
    let per_paper: Vec<Vec<String>> = paper_ids
        .iter()
        .filter_map(|id| {
            state
                .explorations
                .values()
                .find_map(|x| x.annotations.get(id))
                .map(|a| a.relevant_phrases.clone())
        })
        .collect();
    top_keyphrases(per_paper.iter())
}

pub fn build_outline(state: &SessionState) -> OutlineDocument {
    let topics = state
        .collections
        .iter()
        .map(|c| OutlineTopic {
            title: c.title.clone(),
            source: match &c.source {
                CollectionSource::FromTheme { .. } => "theme".into(),
                CollectionSource::FromLinks => "links".into(),
                CollectionSource::Manual => "manual".into(),
            },
            keyphrases: collection_keyphrases(state, &c.source, &c.paper_ids),
            papers: c
                .paper_ids
                .iter()
                .filter_map(|id| state.papers.get(id))
                .map(|p| OutlinePaper {
                    paper_id: p.paper_id.clone(),
                    title: p.title.clone(),
                    year: p.year,
                    venue: p.venue.clone(),
                    disciplines: p.effective_disciplines(),
                })
                .collect(),
        })
        .collect();
    OutlineDocument {
        schema_version: OUTLINE_SCHEMA_VERSION,
        research_topic: state.topic.text.clone(),
        questions: state
            .eqs
            .iter()
            .filter(|e| e.selected)
            .map(|e| OutlineQuestion {
                text: e.text.clone(),
                discipline: e.discipline.clone(),
                explored: state.explorations.contains_key(&e.id),
            })
            .collect(),
        topics,
    }
}

pub fn render_json(doc: &OutlineDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("outline serializes");
    s.push('\n');
    s
}

pub fn render_markdown(doc: &OutlineDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Outline: {}", doc.research_topic);
    if !doc.questions.is_empty() {
        let _ = writeln!(out, "\n## Exploratory questions\n");
        for q in &doc.questions {
            let _ = writeln!(out, "- [{}] {}", q.discipline, q.text);
        }
    }
    if doc.topics.is_empty() {
        let _ = writeln!(out, "\n_No topics collected yet._");
    }
    for (i, t) in doc.topics.iter().enumerate() {
        let _ = writeln!(out, "\n## {}. {}\n", i + 1, t.title);
        if !t.keyphrases.is_empty() {
            let _ = writeln!(out, "Keyphrases: {}\n", t.keyphrases.join(", "));
        }
        for p in &t.papers {
            let mut line = format!("- {}", p.title);
            if let Some(y) = p.year {
                let _ = write!(line, " ({y})");
            }
            if let Some(v) = p.venue.as_deref().filter(|v| !v.is_empty()) {
                let _ = write!(line, ". {v}");
            }
            let _ = write!(line, " [{}]", p.disciplines.join(", "));
            let _ = writeln!(out, "{line}");
        }
    }
    out
}

pub fn render(state: &SessionState, format: ExportFormat) -> String {
    let doc = build_outline(state);
    match format {
        ExportFormat::Json => render_json(&doc),
        ExportFormat::Markdown => render_markdown(&doc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coexplore_core::model::{normalize_topic, PaperRecord};
    use coexplore_core::session::CollectionEdit;

    fn state_with_collections() -> SessionState {
        let mut s = SessionState::new(normalize_topic("older adults").unwrap());
        s.register_papers(&[PaperRecord {
            paper_id: "p1".into(),
            title: "Seniors online".into(),
            abstract_text: String::new(),
            disciplines: vec![],
            year: Some(2020),
            venue: Some("CHI".into()),
            authors: vec![],
            citation_count: 0,
        }]);
        for title in ["First", "Second"] {
            s.apply_edit(&CollectionEdit::Create { title: title.into(), source: CollectionSource::Manual })
                .unwrap();
        }
        s.apply_edit(&CollectionEdit::DropPaper { paper_id: "p1".into(), collection_id: "col-2".into() })
            .unwrap();
        s
    }

    #[test]
    fn empty_session_has_no_topics() {
        let s = SessionState::new(normalize_topic("older adults").unwrap());
        let doc = build_outline(&s);
        assert!(doc.topics.is_empty());
        assert!(render_markdown(&doc).contains("No topics collected yet"));
    }

    #[test]
    fn topics_follow_collection_order() {
        let s = state_with_collections();
        let doc = build_outline(&s);
        let titles: Vec<&str> = doc.topics.iter().map(|t| t.title.as_str()).collect();
        assert_eq!(titles, ["First", "Second"]);
        assert_eq!(doc.topics[1].papers[0].disciplines, ["Unknown"]);
        let md = render_markdown(&doc);
        assert!(md.find("## 1. First").unwrap() < md.find("## 2. Second").unwrap());
        assert!(md.contains("- Seniors online (2020). CHI [Unknown]"));
    }

    #[test]
    fn rendering_is_stable_and_ignores_session_identity() {
        let a = state_with_collections();
        std::thread::sleep(std::time::Duration::from_millis(5));
        let b = state_with_collections();
        assert_ne!(a.session_id, b.session_id);
        for f in [ExportFormat::Json, ExportFormat::Markdown] {
            assert_eq!(render(&a, f), render(&b, f));
        }
    }

    #[test]
    fn format_parsing() {
        assert_eq!("JSON".parse::<ExportFormat>().unwrap(), ExportFormat::Json);
        assert_eq!("md".parse::<ExportFormat>().unwrap(), ExportFormat::Markdown);
        assert!("pdf".parse::<ExportFormat>().is_err());
    }
}
