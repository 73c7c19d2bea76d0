#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use jspg_core::chardata::TableKind;
use jspg_core::eval::EvalRecord;
use jspg_core::semantic::EntryKind;
use jspg_core::{
    load_resources, CharSimCache, Dictionary, EmbeddingStore, HypothesisSet, Keyword, ResourcePaths, ResourceTable,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const HYPOTHESIS: &str = "关于雨音的识别";
pub const KEYWORD: &str = "语音识别";

/// Pinyin rows exactly as printed in the worked example.
pub const EXAMPLE_PINYIN: &str = "关\tguan1\n于\tyu2\n雨\tyu3\n音\tyin1\n的\tde\n识\tshi2\n别\tbie2\n语\tyu3\n";

/// Substitution costs (1 - sim_p), rows = hypothesis chars, columns = keyword chars.
pub const EXAMPLE_COSTS: [[f64; 4]; 7] = [
    [0.50, 0.33, 0.56, 0.56],
    [0.17, 0.43, 0.43, 0.43],
    [0.00, 0.43, 0.57, 0.57],
    [0.43, 0.00, 0.50, 0.38],
    [0.60, 0.67, 0.67, 0.50],
    [0.57, 0.50, 0.00, 0.38],
    [0.57, 0.38, 0.38, 0.00],
];

const INF: f64 = f64::INFINITY;

/// Cost accumulation matrix, rows 0..=7 (hypothesis), columns 0..=4 (keyword).
pub const EXAMPLE_DP: [[f64; 5]; 8] = [
    [0.0, INF, INF, INF, INF],
    [0.0, 0.50, 1.50, 2.50, INF],
    [0.0, 0.17, 0.93, 1.93, 2.93],
    [0.0, 0.00, 0.60, 1.50, 2.50],
    [0.0, 0.43, 0.00, 1.00, 1.88],
    [0.0, 0.60, 1.00, 0.67, 1.50],
    [0.0, 0.57, 1.10, 1.00, 1.04],
    [0.0, 0.57, 0.95, 1.48, 1.00],
];

pub fn example_table() -> Arc<ResourceTable> {
    let mut b = ResourceTable::builder();
    b.load_str(TableKind::Pinyin, "example", EXAMPLE_PINYIN).unwrap();
    Arc::new(b.build())
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn shipped_table() -> Arc<ResourceTable> {
    Arc::new(load_resources(&ResourcePaths::from_dir(data_dir())).expect("shipped resource tables load"))
}

pub fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// Exhaustive enumeration of alignment paths.
///
/// A path starts at any hypothesis position with no keyword consumed and
/// applies moves until the whole keyword is consumed: align `q[i]` with
/// `w[j]`, skip `q[i]` (only after the first keyword character is placed),
/// or skip `w[j]` (never the first or last keyword character).
pub fn brute_force_cost(cost: &dyn Fn(char, char) -> f64, w: &[char], q: &[char], gap: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        cost: &dyn Fn(char, char) -> f64,
        w: &[char],
        q: &[char],
        gap: f64,
        i: usize,
        j: usize,
        acc: f64,
        best: &mut f64,
    ) {
        let s = w.len();
        if j == s {
            *best = best.min(acc);
        }
        if i < q.len() && j < s {
            walk(cost, w, q, gap, i + 1, j + 1, acc + cost(q[i], w[j]), best);
        }
        if i < q.len() && j >= 1 {
            walk(cost, w, q, gap, i + 1, j, acc + gap, best);
        }
        // keyword character number j + 1 (1-based) is skipped
        if j < s && j + 1 != 1 && j + 1 != s {
            walk(cost, w, q, gap, i, j + 1, acc + gap, best);
        }
    }
    let mut best = f64::INFINITY;
    for start in 0..q.len() {
        walk(cost, w, q, gap, start, 0, 0.0, &mut best);
    }
    best
}

fn unit_levenshtein(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => (unit_levenshtein(ra, rb) + usize::from(x != y))
            .min(unit_levenshtein(ra, b) + 1)
            .min(unit_levenshtein(a, rb) + 1),
    }
}

/// Anchored-substring edit distance with 0/1 costs: the first and last
/// keyword characters are substituted against the first and last characters
/// of some substring of `q`; the interior is plain Levenshtein.
pub fn anchored_edit_distance(w: &[char], q: &[char]) -> f64 {
    let sub = |a: char, b: char| usize::from(a != b);
    let s = w.len();
    let mut best = usize::MAX;
    for a in 0..q.len() {
        if s == 1 {
            best = best.min(sub(w[0], q[a]));
            continue;
        }
        for b in a + 1..q.len() {
            let inner = unit_levenshtein(&w[1..s - 1], &q[a + 1..b]);
            best = best.min(sub(w[0], q[a]) + inner + sub(w[s - 1], q[b]));
        }
    }
    if best == usize::MAX {
        f64::INFINITY
    } else {
        best as f64
    }
}

/// Characters grouped by their (single) first reading, restricted to
/// readings shared by at least two characters.
pub fn homophone_groups(table: &ResourceTable) -> BTreeMap<String, Vec<char>> {
    let mut groups: BTreeMap<String, Vec<char>> = BTreeMap::new();
    for c in table.codepoints() {
        if let Some(r) = table.lookup(c).and_then(|r| r.pinyin_readings.first()) {
            groups.entry(r.clone()).or_default().push(c);
        }
    }
    groups.retain(|_, v| v.len() >= 2);
    groups
}

pub struct SyntheticCorpus {
    pub dictionary: Dictionary,
    pub dataset: Vec<EvalRecord>,
    pub store: EmbeddingStore,
}

fn random_word(rng: &mut StdRng, alphabet: &[char], len: usize) -> String {
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// Replaces one character of `word` that has a homophone with a different
/// character of identical reading. `None` if no character qualifies.
pub fn homophone_variant(
    rng: &mut StdRng,
    table: &ResourceTable,
    groups: &BTreeMap<String, Vec<char>>,
    word: &str,
) -> Option<String> {
    let cs = chars(word);
    let mut positions: Vec<usize> = (0..cs.len())
        .filter(|&i| {
            table
                .lookup(cs[i])
                .and_then(|r| r.pinyin_readings.first())
                .is_some_and(|r| groups.contains_key(r))
        })
        .collect();
    positions.shuffle(rng);
    let &pos = positions.first()?;
    let reading = &table.lookup(cs[pos]).unwrap().pinyin_readings[0];
    let options: Vec<char> = groups[reading].iter().copied().filter(|&c| c != cs[pos]).collect();
    let mut out = cs;
    out[pos] = *options.choose(rng)?;
    Some(out.into_iter().collect())
}

fn unit_vector(rng: &mut StdRng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Deterministic corpus over real table characters: each utterance carries
/// one or two gold keywords, embedded verbatim or with one character
/// replaced by a homophone, inside random filler. Query embeddings are noisy
/// mixtures of the gold keyword embeddings.
pub fn synthetic_corpus(table: &ResourceTable, utterances: usize, dict_size: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = StdRng::seed_from_u64(seed);
    let groups = homophone_groups(table);
    let alphabet: Vec<char> = table.codepoints();

    let mut words: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    while words.len() < dict_size {
        let len = rng.gen_range(2..=4);
        let w = random_word(&mut rng, &alphabet, len);
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let dictionary = Dictionary::from_texts(words.iter().cloned()).unwrap();

    let dim = 16;
    let mut store = EmbeddingStore::default();
    let mut kw_vecs = Vec::new();
    for w in &words {
        let v = unit_vector(&mut rng, dim);
        store.insert(EntryKind::Keyword, w.clone(), v.clone()).unwrap();
        kw_vecs.push(v);
    }

    let mut dataset = Vec::new();
    for u in 0..utterances {
        let n_gold = rng.gen_range(1..=2);
        let gold_idx: Vec<usize> = rand::seq::index::sample(&mut rng, words.len(), n_gold).into_vec();
        let n_best = rng.gen_range(1..=3);
        let mut hyps = Vec::new();
        for _ in 0..n_best {
            let lead = rng.gen_range(0..4);
            let mut h = random_word(&mut rng, &alphabet, lead);
            for &g in &gold_idx {
                let word = &words[g];
                let shown = if rng.gen_bool(0.5) {
                    homophone_variant(&mut rng, table, &groups, word).unwrap_or_else(|| word.clone())
                } else {
                    word.clone()
                };
                h.push_str(&shown);
                let tail = rng.gen_range(0..4);
                h.push_str(&random_word(&mut rng, &alphabet, tail));
            }
            hyps.push(h);
        }
        let id = format!("utt{u:04}");
        let mut q = vec![0.0; dim];
        for &g in &gold_idx {
            for (qi, ki) in q.iter_mut().zip(&kw_vecs[g]) {
                *qi += ki;
            }
        }
        let noise = unit_vector(&mut rng, dim);
        for (qi, ni) in q.iter_mut().zip(noise) {
            *qi += 1.5 * ni;
        }
        store.insert(EntryKind::Query, id.clone(), q).unwrap();
        dataset.push(EvalRecord {
            hypotheses: HypothesisSet::new(id, hyps).unwrap(),
            gold_keywords: gold_idx.iter().map(|&g| words[g].clone()).collect(),
            reference_text: None,
        });
    }

    SyntheticCorpus {
        dictionary,
        dataset,
        store,
    }
}

pub fn cache(table: Arc<ResourceTable>) -> CharSimCache {
    CharSimCache::new(table)
}

pub fn keyword(s: &str) -> Keyword {
    Keyword::new(s).unwrap()
}
