//! Runtime configuration assembled from environment variables.

use std::path::PathBuf;

use coexplore_core::eq::{DEFAULT_MAX_FIELDS, DEFAULT_NUM_RQ};
use coexplore_core::llm::{ProviderConfig, ProviderMode};
use coexplore_core::rank::DEFAULT_BETA;
use coexplore_core::relevance::RelevanceConfig;
use coexplore_core::scholar::{ScholarConfig, ScholarMode, DEFAULT_RESULTS_PER_QUERY};
use coexplore_core::theming::ClusteringParams;

pub const DEFAULT_BIND_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Clone)]
pub struct AppConfig {
    pub bind_addr: String,
    pub data_dir: PathBuf,
    pub provider: ProviderConfig,
    pub scholar: ScholarConfig,
    pub relevance: RelevanceConfig,
    pub clustering: ClusteringParams,
    pub beta: f64,
    pub results_per_query: usize,
    pub num_rq: usize,
    pub max_fields: usize,
}

fn parse<T: std::str::FromStr>(name: &str, value: Option<String>) -> anyhow::Result<Option<T>> {
    match value {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow::anyhow!("invalid value `{v}` for {name}")),
    }
}

impl AppConfig {
    pub fn from_env() -> anyhow::Result<Self> {
        Self::from_lookup(|k| std::env::var(k).ok().filter(|v| !v.is_empty()))
    }

    /// Reads `BIND_ADDR`, `DATA_DIR`, `CLUSTER_EPS`, `CLUSTER_MIN_PTS`,
    /// `RELEVANCE_TAU`, `RANK_BETA`, `RESULTS_PER_QUERY` and the provider and
    /// scholar variables.
    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> anyhow::Result<Self> {
        let provider = ProviderConfig::from_lookup(&get)?;
        let scholar = ScholarConfig::from_lookup(&get)?;
        let mut relevance = RelevanceConfig::default();
        if let Some(tau) = parse("RELEVANCE_TAU", get("RELEVANCE_TAU"))? {
            relevance.tau = tau;
        }
        relevance.validate()?;
        let mut clustering = ClusteringParams::default();
        if let Some(eps) = parse("CLUSTER_EPS", get("CLUSTER_EPS"))? {
            clustering.eps = eps;
        }
        if let Some(min_pts) = parse("CLUSTER_MIN_PTS", get("CLUSTER_MIN_PTS"))? {
            clustering.min_pts = min_pts;
        }
        clustering.validate()?;
        Ok(AppConfig {
            bind_addr: get("BIND_ADDR").unwrap_or_else(|| DEFAULT_BIND_ADDR.to_string()),
            data_dir: get("DATA_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data")),
            provider,
            scholar,
            relevance,
            clustering,
            beta: parse("RANK_BETA", get("RANK_BETA"))?.unwrap_or(DEFAULT_BETA),
            results_per_query: parse("RESULTS_PER_QUERY", get("RESULTS_PER_QUERY"))?
                .unwrap_or(DEFAULT_RESULTS_PER_QUERY),
            num_rq: DEFAULT_NUM_RQ,
            max_fields: DEFAULT_MAX_FIELDS,
        })
    }

    /// Points the LLM at recorded fixtures in `dir` and, unless a corpus is
    /// already configured, searches `dir/corpus.json`.
    pub fn use_scripted(&mut self, dir: impl Into<PathBuf>) {
        let dir = dir.into();
        self.provider.mode = ProviderMode::Scripted;
        self.provider.fixture_dir = Some(dir.clone());
        self.scholar.mode = ScholarMode::Corpus;
        if self.scholar.corpus_path.is_none() {
            self.scholar.corpus_path = Some(dir.join("corpus.json"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> =
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn defaults_and_overrides() {
        let cfg = AppConfig::from_lookup(lookup(&[])).unwrap();
        assert_eq!(cfg.bind_addr, DEFAULT_BIND_ADDR);
        assert_eq!(cfg.clustering, ClusteringParams::default());
        assert_eq!(cfg.relevance.tau, 0.6);
        assert_eq!(cfg.results_per_query, 20);

        let cfg = AppConfig::from_lookup(lookup(&[
            ("BIND_ADDR", "0.0.0.0:9000"),
            ("CLUSTER_EPS", "0.3"),
            ("RELEVANCE_TAU", "0.7"),
        ]))
        .unwrap();
        assert_eq!(cfg.bind_addr, "0.0.0.0:9000");
        assert_eq!(cfg.clustering.eps, 0.3);
        assert_eq!(cfg.relevance.tau, 0.7);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(AppConfig::from_lookup(lookup(&[("CLUSTER_EPS", "abc")])).is_err());
        assert!(AppConfig::from_lookup(lookup(&[("RELEVANCE_TAU", "1.5")])).is_err());
        assert!(AppConfig::from_lookup(lookup(&[("CLUSTER_MIN_PTS", "1")])).is_err());
    }

    #[test]
    fn scripted_mode_points_at_fixture_corpus() {
        let mut cfg = AppConfig::from_lookup(lookup(&[])).unwrap();
        cfg.use_scripted("/tmp/fx");
        assert_eq!(cfg.provider.mode, ProviderMode::Scripted);
        assert_eq!(cfg.scholar.corpus_path, Some(PathBuf::from("/tmp/fx/corpus.json")));
    }
}
