//! Character-pair similarity.
//!
//! Pinyin similarity is the normalized Levenshtein distance between
//! readings, `1 - LD(a, b) / (|a| + |b|)`, maximised over every pair of
//! readings when a character is polyphonic. Glyph similarity averages four
//! sub-metrics over whichever of them both characters have data for:
//!
//! 1. four-corner code: share of positionally equal digits
//! 2. structure code: `1 - LD / (len1 + len2)`
//! 3. stroke sequence: `1 - LD / (len1 + len2)`
//! 4. stroke sequence: `2 * LCS / (len1 + len2)`
//!
//! Identical characters always score 1, whatever the tables contain.
//! Characters without data score 0 against anything else, which reduces the
//! aligner to plain edit distance on those positions.

use std::sync::Arc;

use dashmap::DashMap;

use crate::chardata::{FourCornerCode, ResourceTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimilarityKind {
    Pinyin,
    Glyph,
}

impl SimilarityKind {
    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::Pinyin => "pinyin",
            SimilarityKind::Glyph => "glyph",
        }
    }
}

/// Unit-weight edit distance (match 0, insert/delete/substitute 1).
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// `1 - LD / (|a| + |b|)`; two empty sequences are identical.
pub fn normalized_edit_similarity<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / total as f64
}

pub fn reading_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    normalized_edit_similarity(&a, &b)
}

pub fn sim_pinyin(table: &ResourceTable, c1: char, c2: char) -> f64 {
    if c1 == c2 {
        return 1.0;
    }
    let (Some(r1), Some(r2)) = (table.lookup(c1), table.lookup(c2)) else {
        return 0.0;
    };
    let mut best: f64 = 0.0;
    for a in &r1.pinyin_readings {
        for b in &r2.pinyin_readings {
            best = best.max(reading_similarity(a, b));
        }
    }
    best
}

pub fn four_corner_similarity(a: &FourCornerCode, b: &FourCornerCode) -> f64 {
    let equal = a.digits().iter().zip(b.digits()).filter(|(x, y)| x == y).count();
    equal as f64 / 5.0
}

pub fn structure_similarity(a: &str, b: &str) -> f64 {
    reading_similarity(a, b)
}

pub fn stroke_edit_similarity(a: &[u8], b: &[u8]) -> f64 {
    normalized_edit_similarity(a, b)
}

pub fn stroke_lcs_similarity(a: &[u8], b: &[u8]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs_len(a, b) as f64 / total as f64
}

/// The four glyph sub-metrics; `None` where either character lacks data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GlyphBreakdown {
    pub four_corner: Option<f64>,
    pub structure: Option<f64>,
    pub stroke_edit: Option<f64>,
    pub stroke_lcs: Option<f64>,
}

impl GlyphBreakdown {
    pub const IDENTICAL: GlyphBreakdown = GlyphBreakdown {
        four_corner: Some(1.0),
        structure: Some(1.0),
        stroke_edit: Some(1.0),
        stroke_lcs: Some(1.0),
    };

    pub fn components(&self) -> [Option<f64>; 4] {
        [self.four_corner, self.structure, self.stroke_edit, self.stroke_lcs]
    }

    /// Mean of the available components.
    pub fn mean(&self) -> Option<f64> {
        let (sum, n) = self
            .components()
            .into_iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

pub fn glyph_breakdown(table: &ResourceTable, c1: char, c2: char) -> GlyphBreakdown {
    if c1 == c2 {
        return GlyphBreakdown::IDENTICAL;
    }
    let (Some(r1), Some(r2)) = (table.lookup(c1), table.lookup(c2)) else {
        return GlyphBreakdown::default();
    };
    let strokes = r1.strokes.as_deref().zip(r2.strokes.as_deref());
    GlyphBreakdown {
        four_corner: r1
            .four_corner
            .zip(r2.four_corner)
            .map(|(a, b)| four_corner_similarity(&a, &b)),
        structure: r1
            .structure_code
            .as_deref()
            .zip(r2.structure_code.as_deref())
            .map(|(a, b)| structure_similarity(a, b)),
        stroke_edit: strokes.map(|(a, b)| stroke_edit_similarity(a, b)),
        stroke_lcs: strokes.map(|(a, b)| stroke_lcs_similarity(a, b)),
    }
}

pub fn sim_glyph(table: &ResourceTable, c1: char, c2: char) -> f64 {
    glyph_breakdown(table, c1, c2).mean().unwrap_or(0.0)
}

pub fn similarity(table: &ResourceTable, kind: SimilarityKind, c1: char, c2: char) -> f64 {
    match kind {
        SimilarityKind::Pinyin => sim_pinyin(table, c1, c2),
        SimilarityKind::Glyph => sim_glyph(table, c1, c2),
    }
}

/// Memoising front end over a [`ResourceTable`].
///
/// Pairs are stored in canonical order so `(a, b)` and `(b, a)` share an
/// entry. Concurrent first computations of the same key race benignly: both
/// writers store the same value.
#[derive(Debug)]
pub struct CharSimCache {
    table: Arc<ResourceTable>,
    memo: DashMap<(SimilarityKind, char, char), f64>,
}

impl CharSimCache {
    pub fn new(table: Arc<ResourceTable>) -> Self {
        Self {
            table,
            memo: DashMap::new(),
        }
    }

    pub fn table(&self) -> &ResourceTable {
        &self.table
    }

    pub fn similarity(&self, kind: SimilarityKind, c1: char, c2: char) -> f64 {
        if c1 == c2 {
            return 1.0;
        }
        let key = if c1 < c2 { (kind, c1, c2) } else { (kind, c2, c1) };
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let v = similarity(&self.table, kind, key.1, key.2);
        self.memo.insert(key, v);
        v
    }

    pub fn substitution_cost(&self, kind: SimilarityKind, c1: char, c2: char) -> f64 {
        1.0 - self.similarity(kind, c1, c2)
    }

    pub fn cached_pairs(&self) -> usize {
        self.memo.len()
    }
}

pub fn substitution_cost(cache: &CharSimCache, kind: SimilarityKind, c1: char, c2: char) -> f64 {
    cache.substitution_cost(kind, c1, c2)
}
