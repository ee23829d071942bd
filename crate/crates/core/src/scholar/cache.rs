//! One JSON file per request hash, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::ScholarError;
use crate::model::PaperRecord;

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ScholarError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)
            .map_err(|e| ScholarError::Config(format!("cache dir {}: {e}", dir.display())))?;
        Ok(ResponseCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex SHA-256 of the JSON-encoded request parts.
    pub fn key(parts: &[&str]) -> String {
        let canonical = serde_json::to_string(parts).expect("strings serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub async fn get(&self, key: &str) -> Result<Option<Vec<PaperRecord>>, ScholarError> {
        match tokio::fs::read(self.path(key)).await {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| ScholarError::MalformedResponse(format!("cache entry {key}: {e}"))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(ScholarError::Config(format!("reading cache {key}: {e}"))),
        }
    }

    pub async fn put(&self, key: &str, papers: &[PaperRecord]) -> Result<(), ScholarError> {
        let bytes = serde_json::to_vec(papers).expect("papers serialize");
        let dir = self.dir.clone();
        let target = self.path(key);
        tokio::task::spawn_blocking(move || -> std::io::Result<()> {
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(&bytes)?;
            tmp.persist(&target).map_err(|e| e.error)?;
            Ok(())
        })
        .await
        .map_err(|e| ScholarError::Config(format!("cache write task: {e}")))?
        .map_err(|e| ScholarError::Config(format!("writing cache {key}: {e}")))
    }
}
