//! Semantic score: cosine similarity between the embedding of an
//! instruction-prefixed N-best query and the embedding of a keyword.
//!
//! Embeddings are computed offline and loaded from JSONL, or fetched from an
//! embedding service through [`remote::EmbeddingClient`]. Query embeddings
//! are keyed by utterance id, keyword embeddings by raw keyword text.

pub mod remote;
mod store;

pub use store::{load_embedding_store, EmbeddingRecord, EmbeddingStore, EntryKind};

use crate::align::{HypothesisSet, Keyword};

pub const QUERY_INSTRUCTION: &str = "Given a list of candidate transcriptions predicted by a speech recognition model as a query, retrieve keywords relevant to the query. The candidate transcriptions are: ";

#[derive(Debug, thiserror::Error)]
pub enum SemanticError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("zero-norm embedding")]
    ZeroNorm,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{record}: {message}")]
    Record {
        source_name: String,
        record: usize,
        message: String,
    },
    #[error("embedding service: {0}")]
    Service(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for EmbeddingVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SemanticError> {
    if a.dim() != b.dim() {
        return Err(SemanticError::DimMismatch(a.dim(), b.dim()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(SemanticError::ZeroNorm);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// The instruction followed by the hypotheses joined with `", "` and a
/// closing period.
pub fn build_query_text(q: &HypothesisSet) -> String {
    let mut text = String::from(QUERY_INSTRUCTION);
    text.push_str(&q.hypotheses().join(", "));
    text.push('.');
    text
}

/// `None` when either embedding is missing from the store.
pub fn semantic_score(store: &EmbeddingStore, q: &HypothesisSet, w: &Keyword) -> Option<f64> {
    let query = store.query(q.utterance_id())?;
    let keyword = store.keyword(w.text())?;
    // The store guarantees equal dims and non-zero norms.
    cosine(query, keyword).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec())
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&v(&[0.3, 0.4]), &v(&[0.3, 0.4])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine(&v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(SemanticError::DimMismatch(1, 2))
        ));
        assert!(matches!(
            cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(SemanticError::ZeroNorm)
        ));
    }

    #[test]
    fn query_text_single_and_pair() {
        let q = HypothesisSet::new("u1", vec!["买入期权".into()]).unwrap();
        assert_eq!(
            build_query_text(&q),
            "Given a list of candidate transcriptions predicted by a speech recognition model as a query, \
             retrieve keywords relevant to the query. The candidate transcriptions are: 买入期权."
        );
        let q = HypothesisSet::new("u2", vec!["a".into(), "b".into()]).unwrap();
        assert!(build_query_text(&q).ends_with("are: a, b."));
        assert_eq!(build_query_text(&q), build_query_text(&q.clone()));
    }

    #[test]
    fn score_misses_and_values() {
        let mut store = EmbeddingStore::default();
        store.insert(EntryKind::Query, "u1", vec![1.0, 0.0]).unwrap();
        store.insert(EntryKind::Keyword, "甲", vec![0.0, 1.0]).unwrap();
        store.insert(EntryKind::Keyword, "乙", vec![2.0, 0.0]).unwrap();
        let q = HypothesisSet::new("u1", vec!["x".into()]).unwrap();
        assert_eq!(semantic_score(&store, &q, &Keyword::new("甲").unwrap()), Some(0.0));
        assert_eq!(semantic_score(&store, &q, &Keyword::new("乙").unwrap()), Some(1.0));
        assert_eq!(semantic_score(&store, &q, &Keyword::new("丙").unwrap()), None);
        let other = HypothesisSet::new("u9", vec!["x".into()]).unwrap();
        assert_eq!(semantic_score(&store, &other, &Keyword::new("甲").unwrap()), None);
    }
}
