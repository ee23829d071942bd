//! Theme extraction: DBSCAN over contextual embeddings followed by LLM
//! curation (relevance and divisibility judgments, then titling).

use std::collections::{BTreeMap, HashMap, HashSet};

use futures::future::try_join_all;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{Gateway, LlmError, PromptRequest, TemplateId};
use crate::model::{ExplorationContext, PaperRecord, Vector};
use crate::relevance::{
    contextual_embedding_with, prepare_embeddings, EmbeddingTable, RelevanceConfig,
    RelevanceError,
};

/// Factor applied to `eps` when a cluster is split.
pub const SUBCLUSTER_EPS_FACTOR: f64 = 0.7;
pub const MAX_THEME_KEYPHRASES: usize = 8;

#[derive(Debug, Error)]
pub enum ThemingError {
    #[error("invalid clustering parameters: {0}")]
    InvalidParams(String),
    #[error("points have different dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("paper `{0}` appears twice in the input")]
    DuplicatePaper(String),
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams {
    /// Radius in cosine distance (1 - cosine similarity).
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        ClusteringParams { eps: 0.35, min_pts: 3 }
    }
}

impl ClusteringParams {
    pub fn validate(&self) -> Result<(), ThemingError> {
        if !(self.eps > 0.0 && self.eps < 2.0) {
            return Err(ThemingError::InvalidParams(format!("eps {} not in (0, 2)", self.eps)));
        }
        if self.min_pts < 2 {
            return Err(ThemingError::InvalidParams(format!("min_pts {} < 2", self.min_pts)));
        }
        Ok(())
    }
}

/// DBSCAN output: clusters and noise as ascending index lists. Clusters are
/// ordered by their smallest core point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
}

/// `1 - cos(a, b)`; a zero vector is treated as orthogonal to everything.
pub fn cosine_distance(a: &Vector, b: &Vector) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

fn check_dims(points: &[Vector]) -> Result<(), ThemingError> {
    if let Some(first) = points.first() {
        if let Some(bad) = points.iter().find(|p| p.dim() != first.dim()) {
            return Err(ThemingError::DimensionMismatch(first.dim(), bad.dim()));
        }
    }
    Ok(())
}

/// Density-based clustering over cosine distance. A point's neighborhood
/// includes itself; a point is core when its neighborhood has at least
/// `min_pts` members. Points are visited in index order and each cluster is
/// expanded breadth-first, so a border point reachable from several clusters
/// joins the first one created.
pub fn dbscan(points: &[Vector], params: &ClusteringParams) -> Result<Clustering, ThemingError> {
    params.validate()?;
    check_dims(points)?;
    let n = points.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| i == j || cosine_distance(&points[i], &points[j]) <= params.eps)
                .collect()
        })
        .collect();

    const UNSEEN: usize = usize::MAX;
    const NOISE: usize = usize::MAX - 1;
    let mut label = vec![UNSEEN; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();

    for i in 0..n {
        if label[i] != UNSEEN {
            continue;
        }
        if neighbors[i].len() < params.min_pts {
            label[i] = NOISE;
            continue;
        }
        let c = clusters.len();
        clusters.push(Vec::new());
        label[i] = c;
        let mut queue: std::collections::VecDeque<usize> = neighbors[i].iter().copied().collect();
        while let Some(j) = queue.pop_front() {
            if label[j] == NOISE {
                label[j] = c;
                continue;
            }
            if label[j] != UNSEEN {
                continue;
            }
            label[j] = c;
            if neighbors[j].len() >= params.min_pts {
                queue.extend(neighbors[j].iter().copied());
            }
        }
    }

    let mut noise = Vec::new();
    for (i, l) in label.iter().enumerate() {
        if *l == NOISE {
            noise.push(i);
        } else {
            clusters[*l].push(i);
        }
    }
    Ok(Clustering { clusters, noise })
}

/// A titled group of papers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    pub id: String,
    pub title: String,
    pub paper_ids: Vec<String>,
    pub discipline_histogram: BTreeMap<String, usize>,
    pub keyphrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeSet {
    pub eq_id: String,
    pub themes: Vec<Theme>,
    pub possibly_relevant: Vec<String>,
}

impl ThemeSet {
    pub fn empty(eq_id: &str) -> Self {
        ThemeSet {
            eq_id: eq_id.to_string(),
            themes: Vec::new(),
            possibly_relevant: Vec::new(),
        }
    }

    /// Every paper id in themes and the possibly-relevant list, in order.
    pub fn all_paper_ids(&self) -> Vec<&str> {
        self.themes
            .iter()
            .flat_map(|t| t.paper_ids.iter())
            .chain(self.possibly_relevant.iter())
            .map(String::as_str)
            .collect()
    }

    pub fn theme(&self, theme_id: &str) -> Option<&Theme> {
        self.themes.iter().find(|t| t.id == theme_id)
    }

    /// Checks that each retrieved id appears exactly once and nothing else
    /// appears.
    pub fn check_conservation(&self, retrieved: &[String]) -> Result<(), String> {
        let mut seen = HashSet::new();
        for id in self.all_paper_ids() {
            if !seen.insert(id) {
                return Err(format!("paper {id} placed twice"));
            }
        }
        let expected: HashSet<&str> = retrieved.iter().map(String::as_str).collect();
        if let Some(extra) = seen.iter().find(|id| !expected.contains(*id)) {
            return Err(format!("paper {extra} was not retrieved"));
        }
        if let Some(lost) = expected.iter().find(|id| !seen.contains(*id)) {
            return Err(format!("paper {lost} was lost"));
        }
        Ok(())
    }
}

/// Reads a yes/no verdict from the first word of a completion.
pub fn parse_yes_no(completion: &str) -> Option<bool> {
    let word: String = completion
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .chars()
        .take_while(|c| c.is_alphabetic())
        .collect::<String>()
        .to_lowercase();
    match word.as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

/// Cleans a title completion: first non-empty line without list markers,
/// a `Title:` prefix, quotes or emphasis.
pub fn parse_title(completion: &str) -> Option<String> {
    let line = completion.lines().map(str::trim).find(|l| !l.is_empty())?;
    let mut t = line.trim_start_matches(['-', '*', '#', ' ']);
    if t.len() >= 6 && t[..6].eq_ignore_ascii_case("title:") {
        t = &t[6..];
    }
    let t = t.trim().trim_matches(['"', '\'', '*', '`']).trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn paper_listing(papers: &[&PaperRecord]) -> String {
    papers
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{}. {}", i + 1, p.title))
        .collect::<Vec<_>>()
        .join("\n")
}

async fn judge(gateway: &Gateway, request: PromptRequest, default: bool) -> Result<bool, LlmError> {
    let template = request.template_id;
    let answer = gateway.complete(&request).await?;
    Ok(parse_yes_no(&answer).unwrap_or_else(|| {
        tracing::warn!(%template, answer = %answer.trim(), "unparseable yes/no judgment, using default");
        default
    }))
}

/// A cluster that survived curation, before titling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuratedClusters {
    pub clusters: Vec<Vec<usize>>,
    pub possibly_relevant: Vec<usize>,
}

/// Splits `members` with a tighter radius. Returns `None` when the split
/// yields fewer than two groups; otherwise sub-noise joins the closest
/// subcluster so the result still partitions `members`.
pub fn subcluster(
    members: &[usize],
    points: &[Vector],
    params: &ClusteringParams,
) -> Result<Option<Vec<Vec<usize>>>, ThemingError> {
    let tighter = ClusteringParams {
        eps: params.eps * SUBCLUSTER_EPS_FACTOR,
        min_pts: params.min_pts,
    };
    let local: Vec<Vector> = members.iter().map(|&i| points[i].clone()).collect();
    let split = dbscan(&local, &tighter)?;
    if split.clusters.len() < 2 {
        return Ok(None);
    }
    let mut groups = split.clusters.clone();
    for &n in &split.noise {
        let mut best = (f64::INFINITY, 0);
        for (g, cluster) in split.clusters.iter().enumerate() {
            for &m in cluster {
                let d = cosine_distance(&local[n], &local[m]);
                if d < best.0 {
                    best = (d, g);
                }
            }
        }
        groups[best.1].push(n);
    }
    Ok(Some(
        groups
            .into_iter()
            .map(|g| {
                let mut ids: Vec<usize> = g.into_iter().map(|l| members[l]).collect();
                ids.sort_unstable();
                ids
            })
            .collect(),
    ))
}

/// Applies the relevance and divisibility judgments to each cluster. Noise
/// and rejected clusters go to the possibly-relevant list.
pub async fn curate_clusters(
    clustering: &Clustering,
    points: &[Vector],
    papers: &[PaperRecord],
    context: &ExplorationContext,
    params: &ClusteringParams,
    gateway: &Gateway,
) -> Result<CuratedClusters, ThemingError> {
    let verdicts = try_join_all(clustering.clusters.iter().map(|members| async move {
        let listed: Vec<&PaperRecord> = members.iter().map(|&i| &papers[i]).collect();
        let listing = paper_listing(&listed);
        let related = judge(
            gateway,
            PromptRequest::new(TemplateId::ClusterRelevance)
                .var("research_idea", &context.topic.text)
                .var("question", &context.eq.text)
                .var("papers", &listing),
            true,
        )
        .await?;
        if !related {
            return Ok::<_, LlmError>((false, false));
        }
        let divisible = judge(
            gateway,
            PromptRequest::new(TemplateId::ClusterDivisible).var("papers", &listing),
            false,
        )
        .await?;
        Ok((true, divisible))
    }))
    .await?;

    let mut clusters = Vec::new();
    let mut possibly_relevant = clustering.noise.clone();
    for (members, (related, divisible)) in clustering.clusters.iter().zip(verdicts) {
        if !related {
            possibly_relevant.extend(members);
            continue;
        }
        match divisible.then(|| subcluster(members, points, params)).transpose()?.flatten() {
            Some(parts) => clusters.extend(parts),
            None => clusters.push(members.clone()),
        }
    }
    possibly_relevant.sort_unstable();
    Ok(CuratedClusters {
        clusters,
        possibly_relevant,
    })
}

/// Counts each paper once per discipline; papers without disciplines land
/// in the `Unknown` bin.
pub fn discipline_histogram<'a>(
    papers: impl IntoIterator<Item = &'a PaperRecord>,
) -> BTreeMap<String, usize> {
    let mut hist = BTreeMap::new();
    for p in papers {
        for d in p.effective_disciplines() {
            *hist.entry(d).or_insert(0) += 1;
        }
    }
    hist
}

/// The most frequent phrases across member papers, ties broken
/// alphabetically.
pub fn top_keyphrases<'a>(per_paper: impl IntoIterator<Item = &'a Vec<String>>) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for phrases in per_paper {
        let unique: HashSet<&str> = phrases.iter().map(String::as_str).collect();
        for p in unique {
            *counts.entry(p).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(MAX_THEME_KEYPHRASES)
        .map(|(p, _)| p.to_string())
        .collect()
}

/// Embeds, clusters and curates `papers` into a theme set for the context's
/// question. `table` is filled with every embedding used so callers can
/// reuse it for highlighting.
pub async fn extract_themes(
    papers: &[PaperRecord],
    context: &ExplorationContext,
    params: &ClusteringParams,
    config: &RelevanceConfig,
    gateway: &Gateway,
    table: &mut EmbeddingTable,
) -> Result<ThemeSet, ThemingError> {
    params.validate()?;
    config.validate()?;
    let mut ids = HashSet::new();
    for p in papers {
        if !ids.insert(p.paper_id.as_str()) {
            return Err(ThemingError::DuplicatePaper(p.paper_id.clone()));
        }
    }
    if papers.is_empty() {
        return Ok(ThemeSet::empty(&context.eq.id));
    }

    prepare_embeddings(papers, context, table, gateway).await?;
    let mut points = Vec::with_capacity(papers.len());
    let mut relevant: HashMap<usize, Vec<String>> = HashMap::new();
    for (i, p) in papers.iter().enumerate() {
        let (embedding, phrases) = contextual_embedding_with(p, context, table, config)?;
        points.push(embedding.combined);
        relevant.insert(i, phrases);
    }

    let clustering = dbscan(&points, params)?;
    let curated = curate_clusters(&clustering, &points, papers, context, params, gateway).await?;

    let titles = try_join_all(curated.clusters.iter().map(|members| {
        let listed: Vec<&PaperRecord> = members.iter().map(|&i| &papers[i]).collect();
        let request = PromptRequest::new(TemplateId::ThemeTitle)
            .var("research_idea", &context.topic.text)
            .var("question", &context.eq.text)
            .var("papers", paper_listing(&listed));
        async move { gateway.complete(&request).await }
    }))
    .await?;

    let themes = curated
        .clusters
        .iter()
        .zip(titles)
        .enumerate()
        .map(|(n, (members, raw_title))| {
            let keyphrases = top_keyphrases(members.iter().map(|i| &relevant[i]));
            let title = parse_title(&raw_title).unwrap_or_else(|| {
                tracing::warn!(answer = %raw_title.trim(), "empty theme title, using keyphrase");
                keyphrases.first().cloned().unwrap_or_else(|| format!("Theme {}", n + 1))
            });
            Theme {
                id: format!("{}-t{}", context.eq.id, n + 1),
                title,
                paper_ids: members.iter().map(|&i| papers[i].paper_id.clone()).collect(),
                discipline_histogram: discipline_histogram(members.iter().map(|&i| &papers[i])),
                keyphrases,
            }
        })
        .collect();

    Ok(ThemeSet {
        eq_id: context.eq.id.clone(),
        themes,
        possibly_relevant: curated
            .possibly_relevant
            .iter()
            .map(|&i| papers[i].paper_id.clone())
            .collect(),
    })
}
