//! Semantic Scholar Graph API wire format.

use std::time::Duration;

use reqwest::StatusCode;
use serde::Deserialize;

use super::{LinkDirection, ScholarError};
use crate::model::PaperRecord;

const FIELDS: &str = "paperId,title,abstract,year,venue,authors,citationCount,fieldsOfStudy,s2FieldsOfStudy";

pub struct LiveScholar {
    client: reqwest::Client,
    base_url: String,
    api_key: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct WirePaper {
    paper_id: Option<String>,
    title: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    year: Option<i32>,
    venue: Option<String>,
    #[serde(default)]
    authors: Option<Vec<WireAuthor>>,
    citation_count: Option<u64>,
    fields_of_study: Option<Vec<String>>,
    s2_fields_of_study: Option<Vec<WireField>>,
}

#[derive(Debug, Deserialize)]
struct WireAuthor {
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
struct WireField {
    category: String,
}

#[derive(Debug, Deserialize)]
struct SearchPage {
    #[serde(default)]
    data: Vec<WirePaper>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct LinkEntry {
    citing_paper: Option<WirePaper>,
    cited_paper: Option<WirePaper>,
}

#[derive(Debug, Deserialize)]
struct LinkPage {
    #[serde(default)]
    data: Option<Vec<LinkEntry>>,
}

impl WirePaper {
    /// Entries without an id or title are skipped.
    pub(crate) fn into_record(self) -> Option<PaperRecord> {
        let paper_id = self.paper_id?;
        let title = self.title.filter(|t| !t.trim().is_empty())?;
        let mut disciplines: Vec<String> = self.fields_of_study.unwrap_or_default();
        for f in self.s2_fields_of_study.unwrap_or_default() {
            if !disciplines.contains(&f.category) {
                disciplines.push(f.category);
            }
        }
        Some(PaperRecord {
            paper_id,
            title,
            abstract_text: self.abstract_text.unwrap_or_default(),
            disciplines,
            year: self.year,
            venue: self.venue.filter(|v| !v.is_empty()),
            authors: self
                .authors
                .unwrap_or_default()
                .into_iter()
                .filter_map(|a| a.name)
                .collect(),
            citation_count: self.citation_count.unwrap_or(0),
        })
    }
}

impl LiveScholar {
    pub fn new(base_url: &str, api_key: Option<String>) -> Result<Self, ScholarError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| ScholarError::Config(format!("http client: {e}")))?;
        Ok(LiveScholar {
            client,
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
        })
    }

    async fn get_json<T: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        params: &[(&str, String)],
        not_found_id: &str,
    ) -> Result<T, ScholarError> {
        let mut req = self
            .client
            .get(format!("{}{}", self.base_url, path))
            .query(params);
        if let Some(key) = &self.api_key {
            req = req.header("x-api-key", key);
        }
        let resp = req
            .send()
            .await
            .map_err(|e| ScholarError::Network(e.to_string()))?;
        match resp.status() {
            s if s.is_success() => {
                let bytes = resp
                    .bytes()
                    .await
                    .map_err(|e| ScholarError::Network(e.to_string()))?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| ScholarError::MalformedResponse(e.to_string()))
            }
            StatusCode::NOT_FOUND => Err(ScholarError::NotFound(not_found_id.to_string())),
            StatusCode::TOO_MANY_REQUESTS => {
                let retry_after = resp
                    .headers()
                    .get(reqwest::header::RETRY_AFTER)
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.trim().parse::<u64>().ok())
                    .map(Duration::from_secs);
                Err(ScholarError::RateLimited { retry_after })
            }
            s => Err(ScholarError::Network(format!("HTTP {s}"))),
        }
    }

    pub async fn search(&self, query: &str, limit: usize) -> Result<Vec<PaperRecord>, ScholarError> {
        let page: SearchPage = self
            .get_json(
                "/paper/search",
                &[
                    ("query", query.to_string()),
                    ("limit", limit.to_string()),
                    ("fields", FIELDS.to_string()),
                ],
                query,
            )
            .await?;
        Ok(page.data.into_iter().filter_map(WirePaper::into_record).collect())
    }

    pub async fn links(
        &self,
        paper_id: &str,
        direction: LinkDirection,
    ) -> Result<Vec<PaperRecord>, ScholarError> {
        let page: LinkPage = self
            .get_json(
                &format!("/paper/{paper_id}/{}", direction.as_str()),
                &[("fields", FIELDS.to_string()), ("limit", "100".to_string())],
                paper_id,
            )
            .await?;
        Ok(page
            .data
            .unwrap_or_default()
            .into_iter()
            .filter_map(|e| match direction {
                LinkDirection::Citations => e.citing_paper,
                LinkDirection::References => e.cited_paper,
            })
            .filter_map(WirePaper::into_record)
            .collect())
    }

    pub async fn get(&self, paper_id: &str) -> Result<PaperRecord, ScholarError> {
        let paper: WirePaper = self
            .get_json(
                &format!("/paper/{paper_id}"),
                &[("fields", FIELDS.to_string())],
                paper_id,
            )
            .await?;
        paper
            .into_record()
            .ok_or_else(|| ScholarError::MalformedResponse(format!("paper `{paper_id}` lacks id or title")))
    }
}
