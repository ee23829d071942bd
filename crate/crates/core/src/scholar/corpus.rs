//! Offline canned corpus: papers in provider order plus citation and
//! reference adjacency lists.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LinkDirection, ScholarError};
use crate::model::PaperRecord;
use crate::text;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub papers: Vec<PaperRecord>,
    #[serde(default)]
    pub citations: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub references: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    file: CorpusFile,
    index: HashMap<String, usize>,
    words: Vec<HashSet<String>>,
}

fn match_words(text: &str) -> Vec<String> {
    text::content_words(text)
        .iter()
        .map(|w| text::fold_plural(w))
        .collect()
}

impl Corpus {
    pub fn new(file: CorpusFile) -> Result<Self, ScholarError> {
        let mut index = HashMap::new();
        for (i, p) in file.papers.iter().enumerate() {
            if index.insert(p.paper_id.clone(), i).is_some() {
                return Err(ScholarError::Config(format!("duplicate corpus paper `{}`", p.paper_id)));
            }
        }
        for (id, list) in file.citations.iter().chain(&file.references) {
            for target in std::iter::once(id).chain(list) {
                if !index.contains_key(target) {
                    return Err(ScholarError::Config(format!(
                        "adjacency references unknown paper `{target}`"
                    )));
                }
            }
        }
        let words = file
            .papers
            .iter()
            .map(|p| match_words(&p.metadata_text()).into_iter().collect())
            .collect();
        Ok(Corpus { file, index, words })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScholarError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|e| ScholarError::Config(format!("reading corpus {}: {e}", path.display())))?;
        let file: CorpusFile = serde_json::from_slice(&bytes)
            .map_err(|e| ScholarError::MalformedResponse(format!("corpus {}: {e}", path.display())))?;
        Corpus::new(file)
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.file.papers
    }

    pub fn get(&self, paper_id: &str) -> Option<&PaperRecord> {
        self.index.get(paper_id).map(|&i| &self.file.papers[i])
    }

    /// Papers matching at least half of the query's content words (and at
    /// least one), best match first, ties in corpus order.
    pub fn search(&self, query: &str, limit: usize) -> Vec<PaperRecord> {
        let terms = match_words(query);
        let terms: Vec<String> = {
            let mut seen = HashSet::new();
            terms.into_iter().filter(|t| seen.insert(t.clone())).collect()
        };
        if terms.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<(usize, usize)> = self
            .words
            .iter()
            .enumerate()
            .filter_map(|(i, words)| {
                let score = terms.iter().filter(|t| words.contains(*t)).count();
                (score >= 1 && 2 * score >= terms.len()).then_some((i, score))
            })
            .collect();
        hits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        hits.into_iter()
            .take(limit)
            .map(|(i, _)| self.file.papers[i].clone())
            .collect()
    }

    pub fn links(
        &self,
        paper_id: &str,
        direction: LinkDirection,
    ) -> Result<Vec<PaperRecord>, ScholarError> {
        if !self.index.contains_key(paper_id) {
            return Err(ScholarError::NotFound(paper_id.to_string()));
        }
        let map = match direction {
            LinkDirection::Citations => &self.file.citations,
            LinkDirection::References => &self.file.references,
        };
        Ok(map
            .get(paper_id)
            .map(|ids| ids.iter().filter_map(|id| self.get(id).cloned()).collect())
            .unwrap_or_default())
    }
}
