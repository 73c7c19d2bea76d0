//! Keyword-in-hypothesis alignment.
//!
//! `D[i][j]` is the cheapest alignment of the first `j` keyword characters
//! against hypothesis characters ending at position `i`:
//!
//! ```text
//! D[i][0] = 0                      free start anywhere in the hypothesis
//! D[0][j] = inf                    for j >= 1
//! D[i][j] = min(D[i-1][j-1] + sub(q_i, w_j),
//!               D[i-1][j]   + gap,             skip a hypothesis char
//!               D[i][j-1]   + gap)             skip a keyword char, j not in {1, |w|}
//! ```
//!
//! The first and last keyword characters can never be skipped, so the whole
//! keyword is always aligned against some substring of the hypothesis. The
//! alignment cost is the minimum of the last column and the relatedness
//! likelihood is `(|w| - cost) / |w|`, clamped to `[0, 1]`.

use std::fmt;

use crate::charsim::{CharSimCache, SimilarityKind};

pub const DEFAULT_GAP_COST: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("keyword must contain at least one character")]
pub struct EmptyKeyword;

/// A dictionary keyword; never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Keyword {
    text: String,
    chars: Vec<char>,
}

impl Keyword {
    pub fn new(text: impl Into<String>) -> Result<Self, EmptyKeyword> {
        let text = text.into();
        let chars: Vec<char> = text.chars().collect();
        if chars.is_empty() {
            return Err(EmptyKeyword);
        }
        Ok(Self { text, chars })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("utterance {0:?} has no hypotheses")]
pub struct NoHypotheses(pub String);

/// The N-best transcriptions of one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisSet {
    utterance_id: String,
    hypotheses: Vec<String>,
}

impl HypothesisSet {
    pub fn new(utterance_id: impl Into<String>, hypotheses: Vec<String>) -> Result<Self, NoHypotheses> {
        let utterance_id = utterance_id.into();
        if hypotheses.is_empty() {
            return Err(NoHypotheses(utterance_id));
        }
        Ok(Self {
            utterance_id,
            hypotheses,
        })
    }

    pub fn utterance_id(&self) -> &str {
        &self.utterance_id
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn char_sequences(&self) -> Vec<Vec<char>> {
        self.hypotheses.iter().map(|h| h.chars().collect()).collect()
    }
}

/// Cost of aligning hypothesis character `hyp` with keyword character `kw`.
pub trait SubstitutionCost {
    fn cost(&self, hyp: char, kw: char) -> f64;
}

impl<F: Fn(char, char) -> f64> SubstitutionCost for F {
    fn cost(&self, hyp: char, kw: char) -> f64 {
        self(hyp, kw)
    }
}

/// `1 - sim` of the chosen kind, served from a shared cache.
#[derive(Debug, Clone, Copy)]
pub struct CharCost<'a> {
    pub cache: &'a CharSimCache,
    pub kind: SimilarityKind,
}

impl<'a> CharCost<'a> {
    pub fn new(cache: &'a CharSimCache, kind: SimilarityKind) -> Self {
        Self { cache, kind }
    }
}

impl SubstitutionCost for CharCost<'_> {
    fn cost(&self, hyp: char, kw: char) -> f64 {
        self.cache.substitution_cost(self.kind, hyp, kw)
    }
}

/// Exact-match costs: 0 for equal characters, 1 otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatch;

impl SubstitutionCost for ExactMatch {
    fn cost(&self, hyp: char, kw: char) -> f64 {
        if hyp == kw {
            0.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Align `q_i` with `w_j`.
    Diagonal,
    /// Skip hypothesis character `q_i`.
    Vertical,
    /// Skip keyword character `w_j`.
    Horizontal,
}

/// One step of the optimal path, ending in cell `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub mv: Move,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// Infinite when the hypothesis is too short to host both keyword ends.
    pub cost: f64,
    pub rl: f64,
    /// Hypothesis position (1-based row) where the best alignment ends.
    pub end_index: Option<usize>,
    pub trace: Option<Vec<TraceStep>>,
}

impl AlignmentResult {
    fn from_cost(cost: f64, end_index: Option<usize>, keyword_len: usize) -> Self {
        Self {
            cost,
            rl: relatedness(keyword_len, cost),
            end_index,
            trace: None,
        }
    }
}

/// `(|w| - cost) / |w|`, clamped to `[0, 1]`.
pub fn relatedness(keyword_len: usize, cost: f64) -> f64 {
    let w = keyword_len as f64;
    ((w - cost) / w).clamp(0.0, 1.0)
}

/// Row-major `(|q| + 1) x (|w| + 1)` cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DpMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl DpMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![f64::INFINITY; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.cells[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullAlignment {
    pub matrix: DpMatrix,
    pub result: AlignmentResult,
}

/// Aligner with a configurable gap cost. The default gap cost is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aligner {
    pub gap_cost: f64,
}

impl Default for Aligner {
    fn default() -> Self {
        Self {
            gap_cost: DEFAULT_GAP_COST,
        }
    }
}

impl Aligner {
    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn cell<C: SubstitutionCost + ?Sized>(
        &self,
        costs: &C,
        w: &[char],
        hyp: char,
        j: usize,
        diag: f64,
        up: f64,
        left: f64,
    ) -> f64 {
        let mut best = (diag + costs.cost(hyp, w[j - 1])).min(up + self.gap_cost);
        if j != 1 && j != w.len() {
            best = best.min(left + self.gap_cost);
        }
        best
    }

    /// Cost-only alignment using two rolling rows.
    pub fn align<C: SubstitutionCost + ?Sized>(&self, costs: &C, w: &Keyword, q: &[char]) -> AlignmentResult {
        let w = w.chars();
        let s = w.len();
        let mut prev = vec![f64::INFINITY; s + 1];
        let mut cur = vec![f64::INFINITY; s + 1];
        prev[0] = 0.0;
        cur[0] = 0.0;
        let mut best = f64::INFINITY;
        let mut end = None;
        for (i, &hyp) in q.iter().enumerate() {
            for j in 1..=s {
                cur[j] = self.cell(costs, w, hyp, j, prev[j - 1], prev[j], cur[j - 1]);
            }
            if cur[s] < best {
                best = cur[s];
                end = Some(i + 1);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        AlignmentResult::from_cost(best, end, s)
    }

    /// Alignment retaining the full matrix and the optimal path.
    ///
    /// Among equal-cost predecessors the trace prefers diagonal, then
    /// vertical, then horizontal. Among equal-cost end rows it takes the
    /// earliest.
    pub fn align_full<C: SubstitutionCost + ?Sized>(&self, costs: &C, w: &Keyword, q: &[char]) -> FullAlignment {
        let wc = w.chars();
        let s = wc.len();
        let mut d = DpMatrix::new(q.len() + 1, s + 1);
        for i in 0..=q.len() {
            d.set(i, 0, 0.0);
        }
        for (i0, &hyp) in q.iter().enumerate() {
            let i = i0 + 1;
            for j in 1..=s {
                let v = self.cell(costs, wc, hyp, j, d.get(i - 1, j - 1), d.get(i - 1, j), d.get(i, j - 1));
                d.set(i, j, v);
            }
        }

        let mut best = f64::INFINITY;
        let mut end = None;
        for i in 1..=q.len() {
            if d.get(i, s) < best {
                best = d.get(i, s);
                end = Some(i);
            }
        }

        let mut result = AlignmentResult::from_cost(best, end, s);
        if let Some(end) = end {
            result.trace = Some(self.backtrack(costs, wc, q, &d, end));
        }
        FullAlignment { matrix: d, result }
    }

    fn backtrack<C: SubstitutionCost + ?Sized>(
        &self,
        costs: &C,
        w: &[char],
        q: &[char],
        d: &DpMatrix,
        end: usize,
    ) -> Vec<TraceStep> {
        let s = w.len();
        let (mut i, mut j) = (end, s);
        let mut steps = Vec::new();
        while j > 0 {
            let here = d.get(i, j);
            let mv = if i > 0 && d.get(i - 1, j - 1) + costs.cost(q[i - 1], w[j - 1]) == here {
                Move::Diagonal
            } else if i > 0 && d.get(i - 1, j) + self.gap_cost == here {
                Move::Vertical
            } else {
                debug_assert!(j != 1 && j != s);
                Move::Horizontal
            };
            steps.push(TraceStep { mv, i, j });
            match mv {
                Move::Diagonal => {
                    i -= 1;
                    j -= 1;
                }
                Move::Vertical => i -= 1,
                Move::Horizontal => j -= 1,
            }
        }
        steps.reverse();
        steps
    }
}

pub fn extended_sw<C: SubstitutionCost + ?Sized>(costs: &C, w: &Keyword, q: &[char]) -> AlignmentResult {
    Aligner::default().align(costs, w, q)
}

/// Best relatedness of `w` over pre-split hypotheses.
pub fn max_relatedness<C: SubstitutionCost + ?Sized>(costs: &C, w: &Keyword, hypotheses: &[Vec<char>]) -> f64 {
    hypotheses
        .iter()
        .map(|q| extended_sw(costs, w, q).rl)
        .fold(0.0, f64::max)
}

/// Sequence-level score of one keyword against all N-best hypotheses.
pub fn relatedness_nbest(cache: &CharSimCache, kind: SimilarityKind, w: &Keyword, q: &HypothesisSet) -> f64 {
    max_relatedness(&CharCost::new(cache, kind), w, &q.char_sequences())
}
