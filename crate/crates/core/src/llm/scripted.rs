//! Offline provider replaying completion fixtures and deriving embeddings from
//! hashed tokens.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use async_trait::async_trait;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{LlmError, LlmProvider, PromptRequest, TemplateId};
use crate::model::Vector;
use crate::text;

/// Dimension of scripted embeddings.
pub const SCRIPTED_EMBED_DIM: usize = 64;

const EMBED_SALT: &[u8] = b"coexplore-scripted-embedding-v1\0";

/// Hex SHA-256 of the canonical JSON `[template_id, {sorted variables}]`.
pub fn fixture_key(template: TemplateId, variables: &BTreeMap<String, String>) -> String {
    let canonical = serde_json::to_string(&(template.as_str(), variables))
        .expect("string map always serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Replays completions stored as `<fixture_dir>/<key>.txt`.
#[derive(Debug, Clone)]
pub struct ScriptedProvider {
    dir: PathBuf,
}

impl ScriptedProvider {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(LlmError::Config(format!(
                "fixture directory {} does not exist",
                dir.display()
            )));
        }
        Ok(ScriptedProvider { dir })
    }

    pub fn fixture_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.txt"))
    }
}

#[async_trait]
impl LlmProvider for ScriptedProvider {
    async fn complete(&self, request: &PromptRequest, _rendered: &str) -> Result<String, LlmError> {
        let key = request.fixture_key();
        match tokio::fs::read_to_string(self.fixture_path(&key)).await {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(LlmError::FixtureMissing {
                template: request.template_id,
                key,
            }),
            Err(e) => Err(LlmError::Config(format!("reading fixture {key}: {e}"))),
        }
    }

    async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError> {
        Ok(texts.iter().map(|t| scripted_embedding(t)).collect())
    }
}

fn token_vector(token: &str) -> [f64; SCRIPTED_EMBED_DIM] {
    let mut hasher = Sha256::new();
    hasher.update(EMBED_SALT);
    hasher.update(token.as_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(seed);
    let mut out = [0.0; SCRIPTED_EMBED_DIM];
    for x in out.iter_mut() {
        *x = rng.random_range(-1.0..1.0);
    }
    out
}

/// Deterministic bag-of-words embedding: the sum of seeded pseudo-random
/// vectors of the text's content tokens, L2-normalized. Texts without content
/// tokens hash as a whole.
pub fn scripted_embedding(text: &str) -> Vector {
    let mut tokens: Vec<String> = text::content_words(text).iter().map(|t| text::fold_plural(t)).collect();
    if tokens.is_empty() {
        tokens.push(text.trim().to_lowercase());
    }
    let mut acc = vec![0.0; SCRIPTED_EMBED_DIM];
    for token in &tokens {
        for (a, b) in acc.iter_mut().zip(token_vector(token)) {
            *a += b;
        }
    }
    Vector(acc).normalized()
}

/// Wraps a provider and writes every completion it produces as a fixture, so
/// a later [`ScriptedProvider`] run replays it byte for byte.
pub struct RecordingProvider {
    inner: Arc<dyn LlmProvider>,
    dir: PathBuf,
}

impl RecordingProvider {
    pub fn new(inner: Arc<dyn LlmProvider>, dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)
            .map_err(|e| LlmError::Config(format!("creating {}: {e}", dir.display())))?;
        Ok(RecordingProvider { inner, dir })
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

#[async_trait]
impl LlmProvider for RecordingProvider {
    async fn complete(&self, request: &PromptRequest, rendered: &str) -> Result<String, LlmError> {
        let text = self.inner.complete(request, rendered).await?;
        let name = format!("{}.txt", request.fixture_key());
        write_atomic(&self.dir, &name, &text)
            .map_err(|e| LlmError::Config(format!("writing fixture {name}: {e}")))?;
        Ok(text)
    }

    async fn embed(&self, texts: &[String]) -> Result<Vec<Vector>, LlmError> {
        self.inner.embed(texts).await
    }
}
