//! Theming end to end with a hand-built provider: one kept cluster, one the
//! judge rejects, one the judge splits, and a lone outlier.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use coexplore_core::llm::{Gateway, LlmError, LlmProvider, PromptRequest, TemplateId, SCRIPTED_EMBED_DIM};
use coexplore_core::model::{normalize_topic, EqOrigin, ExplorationContext, ExploratoryQuestion, PaperRecord, Vector};
use coexplore_core::relevance::{EmbeddingTable, RelevanceConfig};
use coexplore_core::theming::{extract_themes, ClusteringParams};

struct Planned {
    /// title prefix -> paper vector
    vectors: Vec<(String, Vector)>,
    calls: Mutex<HashMap<TemplateId, usize>>,
}

fn axis(i: usize, j: usize, lean: f64, jitter: f64) -> Vector {
    let mut v = vec![0.0; SCRIPTED_EMBED_DIM];
    v[i] = 1.0;
    v[j] += lean;
    v[40] = jitter;
    Vector(v)
}

#[async_trait]
impl LlmProvider for Planned {
    async fn complete(&self, request: &PromptRequest, _rendered: &str) -> Result<String, LlmError> {
        *self.calls.lock().unwrap().entry(request.template_id).or_default() += 1;
        let papers = request.variables.get("papers").cloned().unwrap_or_default();
        let answer = match request.template_id {
            TemplateId::ClusterRelevance if papers.contains("Beekeeping") => "No, these are about honey.",
            TemplateId::ClusterRelevance => "Yes",
            TemplateId::ClusterDivisible if papers.contains("Tidal") => "Yes. Turbines and lagoons differ.",
            TemplateId::ClusterDivisible => "No",
            TemplateId::ThemeTitle if papers.contains("Glacier") => "\"Glacier Records\"",
            TemplateId::ThemeTitle if papers.contains("turbine") && !papers.contains("lagoon") => "Turbine Wakes",
            TemplateId::ThemeTitle if papers.contains("lagoon") && !papers.contains("turbine") => "Title: Lagoon Sediments",
            other => return Err(LlmError::provider(format!("unexpected {other} call"))),
        };
        Ok(answer.to_string())
    }

    async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError> {
        Ok(texts
            .iter()
            .map(|t| {
                self.vectors
                    .iter()
                    .find(|(prefix, _)| t.starts_with(prefix.as_str()))
                    .map(|(_, v)| v.clone())
                    .unwrap_or_else(|| coexplore_core::llm::scripted_embedding(t))
            })
            .collect())
    }
}

fn paper(id: &str, title: &str) -> PaperRecord {
    PaperRecord {
        paper_id: id.into(),
        title: title.into(),
        abstract_text: String::new(),
        disciplines: vec!["Earth Sciences".into()],
        year: Some(2020),
        venue: None,
        authors: vec![],
        citation_count: 0,
    }
}

fn setup() -> (Vec<PaperRecord>, Arc<Planned>) {
    let mut papers = Vec::new();
    let mut vectors = Vec::new();
    let mut add = |id: &str, title: String, v: Vector| {
        vectors.push((title.clone(), v));
        papers.push(paper(id, &title));
    };
    for k in 0..4 {
        add(&format!("g{k}"), format!("Glacier melt record {k}"), axis(0, 1, 0.0, 0.02 * k as f64));
    }
    for k in 0..4 {
        add(&format!("b{k}"), format!("Beekeeping practice {k}"), axis(5, 6, 0.0, 0.02 * k as f64));
    }
    // two tight groups whose mutual similarity (about 0.66) passes the
    // default radius but not the tighter one
    for k in 0..3 {
        add(&format!("t{k}"), format!("Tidal turbine wake {k}"), axis(10, 11, 0.45, 0.01 * k as f64));
        add(&format!("l{k}"), format!("Tidal lagoon sediment {k}"), axis(10, 11, -0.45, 0.01 * k as f64));
    }
    add("o1", "Opera staging history".into(), axis(20, 21, 0.0, 0.0));
    let provider = Arc::new(Planned {
        vectors,
        calls: Mutex::new(HashMap::new()),
    });
    (papers, provider)
}

fn context() -> ExplorationContext {
    let topic = normalize_topic("polar climate archives").unwrap();
    let eq = ExploratoryQuestion {
        id: "eq-4".into(),
        text: "What do frozen archives reveal?".into(),
        discipline: "Geology".into(),
        subfield: None,
        origin: EqOrigin::UserCreated,
        selected: true,
        issues: vec![],
    };
    ExplorationContext::new(topic, eq)
}

#[tokio::test]
async fn rejected_clusters_go_to_possibly_relevant_and_divisible_ones_split() {
    let (papers, provider) = setup();
    let gateway = Gateway::new(provider.clone(), 2);
    let mut table = EmbeddingTable::new();
    let set = extract_themes(
        &papers,
        &context(),
        &ClusteringParams::default(),
        &RelevanceConfig::default(),
        &gateway,
        &mut table,
    )
    .await
    .unwrap();

    let titles: Vec<&str> = set.themes.iter().map(|t| t.title.as_str()).collect();
    assert_eq!(titles, ["Glacier Records", "Turbine Wakes", "Lagoon Sediments"]);
    assert_eq!(set.themes[0].paper_ids, ["g0", "g1", "g2", "g3"]);
    assert_eq!(set.themes[1].paper_ids, ["t0", "t1", "t2"]);
    assert_eq!(set.themes[2].paper_ids, ["l0", "l1", "l2"]);
    assert_eq!(set.themes[1].id, "eq-4-t2");
    assert_eq!(set.themes[0].discipline_histogram["Earth Sciences"], 4);

    let mut rest = set.possibly_relevant.clone();
    rest.sort();
    assert_eq!(rest, ["b0", "b1", "b2", "b3", "o1"]);

    let ids: Vec<String> = papers.iter().map(|p| p.paper_id.clone()).collect();
    set.check_conservation(&ids).unwrap();

    let calls = provider.calls.lock().unwrap();
    // relevance is asked once per cluster, divisibility only for kept ones
    assert_eq!(calls[&TemplateId::ClusterRelevance], 3);
    assert_eq!(calls[&TemplateId::ClusterDivisible], 2);
    assert_eq!(calls[&TemplateId::ThemeTitle], 3);
}

#[tokio::test]
async fn empty_input_yields_empty_theme_set() {
    let (_, provider) = setup();
    let gateway = Gateway::new(provider, 2);
    let set = extract_themes(
        &[],
        &context(),
        &ClusteringParams::default(),
        &RelevanceConfig::default(),
        &gateway,
        &mut EmbeddingTable::new(),
    )
    .await
    .unwrap();
    assert!(set.themes.is_empty() && set.possibly_relevant.is_empty());
    assert_eq!(set.eq_id, "eq-4");
}

#[tokio::test]
async fn duplicate_papers_are_rejected() {
    let (mut papers, provider) = setup();
    papers.push(papers[0].clone());
    let gateway = Gateway::new(provider, 2);
    let err = extract_themes(
        &papers,
        &context(),
        &ClusteringParams::default(),
        &RelevanceConfig::default(),
        &gateway,
        &mut EmbeddingTable::new(),
    )
    .await
    .unwrap_err();
    assert!(err.to_string().contains("g0"), "{err}");
}
