//! Score fusion and top-K selection.
//!
//! ```text
//! F_pg = alpha * F_p + (1 - alpha) * F_g
//! F    = beta  * F_s + (1 - beta)  * F_pg
//! ```
//!
//! Ranking is by `F` descending, ties broken by keyword text in ascending
//! code point order, so the output never depends on dictionary order or
//! thread scheduling.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::align::{max_relatedness, CharCost, HypothesisSet, Keyword};
use crate::charsim::{CharSimCache, SimilarityKind};
use crate::semantic::{semantic_score, EmbeddingStore};

pub const DEFAULT_ALPHA: f64 = 0.7;
pub const DEFAULT_BETA: f64 = 0.4;
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum FusionError {
    #[error("dictionary is empty")]
    EmptyDictionary,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{source_name}:{line}: {message}")]
    Dictionary {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// What to do with `F` when the semantic score is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingSemanticPolicy {
    /// `F = (1 - beta) * F_pg`
    TreatAsZero,
    /// `F = F_pg`
    #[default]
    RenormalizeToPgOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalConfig {
    pub alpha: f64,
    pub beta: f64,
    pub top_k: usize,
    pub semantic_enabled: bool,
    pub missing_semantic_policy: MissingSemanticPolicy,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            top_k: DEFAULT_TOP_K,
            semantic_enabled: true,
            missing_semantic_policy: MissingSemanticPolicy::default(),
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(FusionError::InvalidConfig(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        if self.top_k == 0 {
            return Err(FusionError::InvalidConfig("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn fuse_pg(alpha: f64, f_p: f64, f_g: f64) -> f64 {
    alpha * f_p + (1.0 - alpha) * f_g
}

pub fn fuse_final(beta: f64, f_s: Option<f64>, f_pg: f64, policy: MissingSemanticPolicy) -> f64 {
    match (f_s, policy) {
        (Some(s), _) => beta * s + (1.0 - beta) * f_pg,
        (None, MissingSemanticPolicy::TreatAsZero) => (1.0 - beta) * f_pg,
        (None, MissingSemanticPolicy::RenormalizeToPgOnly) => f_pg,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredKeyword {
    pub keyword: Keyword,
    pub f_s: Option<f64>,
    pub f_p: f64,
    pub f_g: f64,
    pub f_pg: f64,
    pub f: f64,
    /// 1-based; 0 until ranked.
    pub rank: usize,
}

impl ScoredKeyword {
    /// Fuses the component scores under `cfg`. Unranked.
    pub fn from_components(keyword: Keyword, f_s: Option<f64>, f_p: f64, f_g: f64, cfg: &RetrievalConfig) -> Self {
        let f_pg = fuse_pg(cfg.alpha, f_p, f_g);
        let f = fuse_final(cfg.beta, f_s, f_pg, cfg.missing_semantic_policy);
        Self {
            keyword,
            f_s,
            f_p,
            f_g,
            f_pg,
            f,
            rank: 0,
        }
    }
}

/// `F` descending, then keyword text ascending.
pub fn ranking_order(a: &ScoredKeyword, b: &ScoredKeyword) -> Ordering {
    b.f.total_cmp(&a.f).then_with(|| a.keyword.text().cmp(b.keyword.text()))
}

/// Sorts, truncates to `top_k` and assigns ranks 1..=K.
pub fn rank(mut scored: Vec<ScoredKeyword>, top_k: usize) -> Vec<ScoredKeyword> {
    scored.par_sort_unstable_by(ranking_order);
    scored.truncate(top_k);
    for (i, s) in scored.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    scored
}

/// Ordered set of unique keywords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    keywords: Vec<Keyword>,
}

impl Dictionary {
    pub fn new(keywords: Vec<Keyword>) -> Result<Self, FusionError> {
        if keywords.is_empty() {
            return Err(FusionError::EmptyDictionary);
        }
        let mut seen = HashSet::new();
        for (i, w) in keywords.iter().enumerate() {
            if !seen.insert(w.text()) {
                return Err(FusionError::Dictionary {
                    source_name: "<memory>".into(),
                    line: i + 1,
                    message: format!("duplicate keyword {:?}", w.text()),
                });
            }
        }
        Ok(Self { keywords })
    }

    pub fn from_texts<I, S>(texts: I) -> Result<Self, FusionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let keywords = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                Keyword::new(t).map_err(|e| FusionError::Dictionary {
                    source_name: "<memory>".into(),
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(keywords)
    }

    /// One keyword per line. Surrounding whitespace is trimmed; blank lines
    /// are skipped.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, FusionError> {
        let mut keywords = Vec::new();
        let mut first_seen = std::collections::HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let entry = line.trim();
            if entry.is_empty() {
                continue;
            }
            if let Some(first) = first_seen.insert(entry.to_owned(), idx + 1) {
                return Err(FusionError::Dictionary {
                    source_name: source_name.to_owned(),
                    line: idx + 1,
                    message: format!("duplicate keyword {entry:?} (first on line {first})"),
                });
            }
            keywords.push(Keyword::new(entry).expect("non-empty after trim"));
        }
        if keywords.is_empty() {
            return Err(FusionError::EmptyDictionary);
        }
        Ok(Self { keywords })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FusionError> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| FusionError::Io {
            path: name.clone(),
            source,
        })?;
        Self::parse(&text, &name)
    }

    pub fn keywords(&self) -> &[Keyword] {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// Component scores of every dictionary keyword for one utterance, unranked.
pub fn score_all(
    cache: &CharSimCache,
    store: &EmbeddingStore,
    dict: &Dictionary,
    q: &HypothesisSet,
    cfg: &RetrievalConfig,
) -> Vec<ScoredKeyword> {
    let hyps = q.char_sequences();
    let pinyin = CharCost::new(cache, SimilarityKind::Pinyin);
    let glyph = CharCost::new(cache, SimilarityKind::Glyph);
    dict.keywords()
        .par_iter()
        .map(|w| {
            let f_p = max_relatedness(&pinyin, w, &hyps);
            let f_g = max_relatedness(&glyph, w, &hyps);
            let f_s = if cfg.semantic_enabled {
                semantic_score(store, q, w)
            } else {
                None
            };
            ScoredKeyword::from_components(w.clone(), f_s, f_p, f_g, cfg)
        })
        .collect()
}

pub fn retrieve_topk(
    cache: &CharSimCache,
    store: &EmbeddingStore,
    dict: &Dictionary,
    q: &HypothesisSet,
    cfg: &RetrievalConfig,
) -> Result<Vec<ScoredKeyword>, FusionError> {
    cfg.validate()?;
    if dict.is_empty() {
        return Err(FusionError::EmptyDictionary);
    }
    Ok(rank(score_all(cache, store, dict, q, cfg), cfg.top_k))
}

/// Fixed 6-decimal JSON number.
fn fixed6(v: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.6}")).expect("finite float formats as a JSON number")
}

#[derive(Serialize)]
struct RetrievedJson<'a> {
    keyword: &'a str,
    rank: usize,
    f: Box<RawValue>,
    f_s: Option<Box<RawValue>>,
    f_p: Box<RawValue>,
    f_g: Box<RawValue>,
    f_pg: Box<RawValue>,
}

#[derive(Serialize)]
struct RecordJson<'a> {
    utterance_id: &'a str,
    retrieved: Vec<RetrievedJson<'a>>,
}

/// One output line (no trailing newline) for an utterance's ranked list.
pub fn retrieval_json_line(utterance_id: &str, ranked: &[ScoredKeyword]) -> String {
    let record = RecordJson {
        utterance_id,
        retrieved: ranked
            .iter()
            .map(|s| RetrievedJson {
                keyword: s.keyword.text(),
                rank: s.rank,
                f: fixed6(s.f),
                f_s: s.f_s.map(fixed6),
                f_p: fixed6(s.f_p),
                f_g: fixed6(s.f_g),
                f_pg: fixed6(s.f_pg),
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("serializable record")
}
