use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmbeddingVector, SemanticError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Keyword,
    Query,
}

/// One line of the embedding JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub kind: EntryKind,
    pub key: String,
    pub embedding: Vec<f64>,
}

/// Precomputed embeddings. All vectors share one dimension, fixed by the
/// first insertion, and have a finite non-zero norm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: Option<usize>,
    keywords: HashMap<String, EmbeddingVector>,
    queries: HashMap<String, EmbeddingVector>,
}

impl EmbeddingStore {
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty() && self.queries.is_empty()
    }

    pub fn keyword_count(&self) -> usize {
        self.keywords.len()
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    pub fn keyword(&self, text: &str) -> Option<&EmbeddingVector> {
        self.keywords.get(text)
    }

    pub fn query(&self, utterance_id: &str) -> Option<&EmbeddingVector> {
        self.queries.get(utterance_id)
    }

    /// Adds one vector; the error message is suitable for wrapping in a
    /// record-numbered diagnostic.
    pub fn insert(&mut self, kind: EntryKind, key: impl Into<String>, values: Vec<f64>) -> Result<(), String> {
        let key = key.into();
        if values.is_empty() {
            return Err("empty embedding".into());
        }
        if let Some(dim) = self.dim {
            if values.len() != dim {
                return Err(format!("dimension {} differs from store dimension {dim}", values.len()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("non-finite embedding value".into());
        }
        let vector = EmbeddingVector::new(values);
        if vector.norm() == 0.0 {
            return Err("zero-norm embedding".into());
        }
        let map = match kind {
            EntryKind::Keyword => &mut self.keywords,
            EntryKind::Query => &mut self.queries,
        };
        if map.contains_key(&key) {
            return Err(format!("duplicate {} key {key:?}", kind_name(kind)));
        }
        self.dim = Some(vector.dim());
        map.insert(key, vector);
        Ok(())
    }

    pub fn from_reader<R: BufRead>(reader: R, source_name: &str) -> Result<Self, SemanticError> {
        let mut store = Self::default();
        let mut record = 0;
        for line in reader.lines() {
            let line = line.map_err(|source| SemanticError::Io {
                path: source_name.to_owned(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            record += 1;
            let err = |message: String| SemanticError::Record {
                source_name: source_name.to_owned(),
                record,
                message,
            };
            let parsed: EmbeddingRecord = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
            store.insert(parsed.kind, parsed.key, parsed.embedding).map_err(err)?;
        }
        Ok(store)
    }
}

fn kind_name(kind: EntryKind) -> &'static str {
    match kind {
        EntryKind::Keyword => "keyword",
        EntryKind::Query => "query",
    }
}

pub fn load_embedding_store(path: impl AsRef<Path>) -> Result<EmbeddingStore, SemanticError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| SemanticError::Io {
        path: name.clone(),
        source,
    })?;
    EmbeddingStore::from_reader(BufReader::new(file), &name)
}
