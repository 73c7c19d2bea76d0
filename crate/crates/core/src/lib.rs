//! Keyword retrieval for contextual Chinese ASR.
//!
//! Given the N-best hypotheses of an utterance, every keyword of a large
//! dictionary is scored by fusing three signals and the top-K keywords are
//! kept:
//!
//! * a semantic score, the cosine similarity of precomputed embeddings
//!   ([`semantic`]);
//! * a pinyin score and a glyph score, each obtained by aligning the keyword
//!   against every hypothesis with character-similarity-weighted
//!   substitution costs ([`charsim`], [`align`]).
//!
//! [`fusion`] combines and ranks the scores; [`eval`] measures Recall@K.

pub mod align;
pub mod chardata;
pub mod charsim;
pub mod eval;
pub mod fusion;
pub mod semantic;

pub use align::{
    extended_sw, relatedness_nbest, Aligner, AlignmentResult, CharCost, HypothesisSet, Keyword, SubstitutionCost,
};
pub use chardata::{load_resources, CharRecord, ResourcePaths, ResourceTable};
pub use charsim::{sim_glyph, sim_pinyin, substitution_cost, CharSimCache, SimilarityKind};
pub use eval::{run_eval, EvalRecord, RecallReport};
pub use fusion::{retrieve_topk, Dictionary, MissingSemanticPolicy, RetrievalConfig, ScoredKeyword};
pub use semantic::{build_query_text, cosine, semantic_score, EmbeddingStore, EmbeddingVector};
