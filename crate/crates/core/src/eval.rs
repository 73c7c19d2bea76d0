//! Recall@K over labelled utterances.
//!
//! Recall is micro-averaged over gold keyword instances: hits in the top-K
//! lists divided by the total number of gold keywords. Utterances without
//! gold keywords contribute nothing. A corpus with no gold keywords at all
//! reports 1.0 and a warning. The macro average (mean of per-utterance
//! recalls) is reported alongside.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::HypothesisSet;
use crate::charsim::CharSimCache;
use crate::fusion::{rank, score_all, Dictionary, FusionError, RetrievalConfig, ScoredKeyword};
use crate::semantic::EmbeddingStore;

/// K values reported by default.
pub const DEFAULT_K_VALUES: [usize; 7] = [1, 3, 5, 10, 20, 50, 100];

pub const CSV_HEADER: &str = "k,recall_micro,recall_macro,hits,total";

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{source_name}:{line}: {message}")]
    Dataset {
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
    #[error("dataset {0} contains no utterances")]
    EmptyDataset(String),
    #[error("no retrieval result for utterance {0:?}")]
    MissingRetrieval(String),
    #[error("invalid K list: {0}")]
    InvalidK(String),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRecord {
    pub hypotheses: HypothesisSet,
    pub gold_keywords: Vec<String>,
    pub reference_text: Option<String>,
}

impl EvalRecord {
    pub fn utterance_id(&self) -> &str {
        self.hypotheses.utterance_id()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetLine {
    id: String,
    hypotheses: Vec<String>,
    #[serde(default)]
    gold_keywords: Vec<String>,
    #[serde(default)]
    reference: Option<String>,
}

/// Parses dataset JSONL. Blank lines are skipped; ids must be unique.
pub fn parse_dataset(text: &str, source_name: &str) -> Result<Vec<EvalRecord>, EvalError> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Dataset {
            source_name: source_name.to_owned(),
            line: idx + 1,
            message,
        };
        let parsed: DatasetLine = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if !ids.insert(parsed.id.clone()) {
            return Err(err(format!("duplicate utterance id {:?}", parsed.id)));
        }
        let mut gold = HashSet::new();
        if let Some(dup) = parsed.gold_keywords.iter().find(|g| !gold.insert(g.as_str())) {
            return Err(err(format!("duplicate gold keyword {dup:?}")));
        }
        let hypotheses = HypothesisSet::new(parsed.id, parsed.hypotheses).map_err(|e| err(e.to_string()))?;
        records.push(EvalRecord {
            hypotheses,
            gold_keywords: parsed.gold_keywords,
            reference_text: parsed.reference,
        });
    }
    Ok(records)
}

/// Reads a dataset file; an empty dataset is an error.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>, EvalError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: name.clone(),
        source,
    })?;
    let records = parse_dataset(&text, &name)?;
    if records.is_empty() {
        return Err(EvalError::EmptyDataset(name));
    }
    Ok(records)
}

fn count_hits(ranked: &[String], gold: &[String], k: usize) -> usize {
    let top: HashSet<&str> = ranked.iter().take(k).map(String::as_str).collect();
    gold.iter().filter(|g| top.contains(g.as_str())).count()
}

/// Micro-averaged Recall@k.
pub fn recall_at_k(
    retrieved_by_utterance: &HashMap<String, Vec<String>>,
    gold_by_utterance: &HashMap<String, Vec<String>>,
    k: usize,
) -> Result<f64, EvalError> {
    let mut hits = 0;
    let mut total = 0;
    for (id, gold) in gold_by_utterance {
        if gold.is_empty() {
            continue;
        }
        let ranked = retrieved_by_utterance
            .get(id)
            .ok_or_else(|| EvalError::MissingRetrieval(id.clone()))?;
        hits += count_hits(ranked, gold, k);
        total += gold.len();
    }
    if total == 0 {
        log::warn!("no gold keywords: Recall@{k} defined as 1.0");
        return Ok(1.0);
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallRow {
    pub k: usize,
    pub recall_micro: f64,
    pub recall_macro: f64,
    pub hits: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceRecall {
    pub utterance_id: String,
    pub gold: usize,
    /// Hits at each K, aligned with the report's `k_values`.
    pub hits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallReport {
    pub k_values: Vec<usize>,
    pub rows: Vec<RecallRow>,
    pub per_utterance: Vec<UtteranceRecall>,
    pub warnings: Vec<String>,
}

pub fn validate_k_list(k_list: &[usize]) -> Result<(), EvalError> {
    if k_list.is_empty() {
        return Err(EvalError::InvalidK("empty".into()));
    }
    if k_list[0] == 0 {
        return Err(EvalError::InvalidK("K must be at least 1".into()));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::InvalidK(format!("{k_list:?} is not strictly ascending")));
    }
    Ok(())
}

impl RecallReport {
    /// Builds the report from ranked keyword texts, given in dataset order as
    /// `(utterance id, ranked texts, gold texts)`.
    pub fn from_rankings<'a, I>(k_list: &[usize], rankings: I) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = (&'a str, &'a [String], &'a [String])>,
    {
        validate_k_list(k_list)?;
        let per_utterance: Vec<UtteranceRecall> = rankings
            .into_iter()
            .map(|(id, ranked, gold)| UtteranceRecall {
                utterance_id: id.to_owned(),
                gold: gold.len(),
                hits: k_list.iter().map(|&k| count_hits(ranked, gold, k)).collect(),
            })
            .collect();

        let total: usize = per_utterance.iter().map(|u| u.gold).sum();
        let labelled: Vec<&UtteranceRecall> = per_utterance.iter().filter(|u| u.gold > 0).collect();
        let mut warnings = Vec::new();
        if total == 0 {
            let msg = "no gold keywords in dataset; recall reported as 1.0".to_owned();
            log::warn!("{msg}");
            warnings.push(msg);
        }

        let rows = k_list
            .iter()
            .enumerate()
            .map(|(ki, &k)| {
                let hits: usize = per_utterance.iter().map(|u| u.hits[ki]).sum();
                let (recall_micro, recall_macro) = if total == 0 {
                    (1.0, 1.0)
                } else {
                    let macro_sum: f64 = labelled.iter().map(|u| u.hits[ki] as f64 / u.gold as f64).sum();
                    (hits as f64 / total as f64, macro_sum / labelled.len() as f64)
                };
                RecallRow {
                    k,
                    recall_micro,
                    recall_macro,
                    hits,
                    total,
                }
            })
            .collect();

        Ok(Self {
            k_values: k_list.to_vec(),
            rows,
            per_utterance,
            warnings,
        })
    }

    pub fn recall_micro(&self, k: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.recall_micro)
    }

    pub fn recall_macro(&self, k: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.recall_macro)
    }

    /// Recall must never drop as K grows.
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].hits <= w[1].hits && w[0].recall_macro <= w[1].recall_macro + 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{},{}",
                r.k, r.recall_micro, r.recall_macro, r.hits, r.total
            );
        }
        out
    }

    /// Human-readable table with 4-decimal recalls.
    pub fn to_table(&self) -> String {
        let mut out = String::from("    K   R_micro   R_macro    hits / total\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>5}   {:.4}    {:.4}    {:>5} / {}",
                r.k, r.recall_micro, r.recall_macro, r.hits, r.total
            );
        }
        out
    }
}

/// Evaluation output: the report plus each utterance's ranked list at
/// `max(k_list)`, in dataset order.
#[derive(Debug, Clone)]
pub struct EvalRun {
    pub report: RecallReport,
    pub rankings: Vec<(String, Vec<ScoredKeyword>)>,
}

impl EvalRun {
    /// Per-utterance JSONL lines: gold keywords, hits at each K and the
    /// retrieved keyword texts.
    pub fn utterance_json_lines(&self, dataset: &[EvalRecord]) -> Vec<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            utterance_id: &'a str,
            gold_keywords: &'a [String],
            hits: Vec<(usize, usize)>,
            retrieved: Vec<&'a str>,
        }
        self.rankings
            .iter()
            .zip(dataset)
            .zip(&self.report.per_utterance)
            .map(|(((id, ranked), rec), u)| {
                let line = Line {
                    utterance_id: id,
                    gold_keywords: &rec.gold_keywords,
                    hits: self
                        .report
                        .k_values
                        .iter()
                        .copied()
                        .zip(u.hits.iter().copied())
                        .collect(),
                    retrieved: ranked.iter().map(|s| s.keyword.text()).collect(),
                };
                serde_json::to_string(&line).expect("serializable line")
            })
            .collect()
    }
}

fn texts(ranked: &[ScoredKeyword]) -> Vec<String> {
    ranked.iter().map(|s| s.keyword.text().to_owned()).collect()
}

fn report_from(
    k_list: &[usize],
    dataset: &[EvalRecord],
    ranked_texts: &[Vec<String>],
) -> Result<RecallReport, EvalError> {
    RecallReport::from_rankings(
        k_list,
        dataset
            .iter()
            .zip(ranked_texts)
            .map(|(rec, r)| (rec.utterance_id(), r.as_slice(), rec.gold_keywords.as_slice())),
    )
}

/// Runs retrieval once per utterance with `top_k = max(k_list)` and derives
/// every Recall@K from prefixes of that list.
pub fn run_eval(
    cache: &CharSimCache,
    store: &EmbeddingStore,
    dict: &Dictionary,
    dataset: &[EvalRecord],
    cfg: &RetrievalConfig,
    k_list: &[usize],
) -> Result<EvalRun, EvalError> {
    validate_k_list(k_list)?;
    let cfg = RetrievalConfig {
        top_k: *k_list.last().expect("validated non-empty"),
        ..cfg.clone()
    };
    cfg.validate()?;
    let rankings: Vec<(String, Vec<ScoredKeyword>)> = dataset
        .par_iter()
        .map(|rec| {
            let ranked = rank(score_all(cache, store, dict, &rec.hypotheses, &cfg), cfg.top_k);
            (rec.utterance_id().to_owned(), ranked)
        })
        .collect();
    let ranked_texts: Vec<Vec<String>> = rankings.iter().map(|(_, r)| texts(r)).collect();
    let report = report_from(k_list, dataset, &ranked_texts)?;
    Ok(EvalRun { report, rankings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub alpha: f64,
    pub beta: f64,
    pub report: RecallReport,
}

/// Sweeps every `(alpha, beta)` pair. Component scores do not depend on the
/// weights, so they are computed once per utterance and re-fused per setting.
#[allow(clippy::too_many_arguments)]
pub fn ablation_sweep(
    cache: &CharSimCache,
    store: &EmbeddingStore,
    dict: &Dictionary,
    dataset: &[EvalRecord],
    base: &RetrievalConfig,
    alphas: &[f64],
    betas: &[f64],
    k_list: &[usize],
) -> Result<Vec<AblationRow>, EvalError> {
    validate_k_list(k_list)?;
    let top_k = *k_list.last().expect("validated non-empty");
    let components: Vec<Vec<ScoredKeyword>> = dataset
        .par_iter()
        .map(|rec| score_all(cache, store, dict, &rec.hypotheses, base))
        .collect();

    let mut rows = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            let cfg = RetrievalConfig {
                alpha,
                beta,
                top_k,
                ..base.clone()
            };
            cfg.validate()?;
            let ranked_texts: Vec<Vec<String>> = components
                .par_iter()
                .map(|scored| {
                    let refused = scored
                        .iter()
                        .map(|s| ScoredKeyword::from_components(s.keyword.clone(), s.f_s, s.f_p, s.f_g, &cfg))
                        .collect();
                    texts(&rank(refused, top_k))
                })
                .collect();
            rows.push(AblationRow {
                alpha,
                beta,
                report: report_from(k_list, dataset, &ranked_texts)?,
            });
        }
    }
    Ok(rows)
}

/// Table with one line per setting and the requested R@K columns (percent).
pub fn format_ablation_table(rows: &[AblationRow], columns: &[usize]) -> String {
    let mut out = String::from("alpha  beta");
    for k in columns {
        let _ = write!(out, "   R@{k:<4}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{:<5}  {:<4}", row.alpha, row.beta);
        for &k in columns {
            match row.report.recall_micro(k) {
                Some(r) => {
                    let _ = write!(out, "   {:>6.2}", 100.0 * r);
                }
                None => out.push_str("        -"),
            }
        }
        out.push('\n');
    }
    out
}
