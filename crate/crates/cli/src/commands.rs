use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::anyhow;
use jspg_core::align::{Aligner, Move};
use jspg_core::chardata::TableKind;
use jspg_core::charsim::glyph_breakdown;
use jspg_core::eval::{ablation_sweep, format_ablation_table, load_dataset, validate_k_list, CSV_HEADER};
use jspg_core::fusion::retrieval_json_line;
use jspg_core::semantic::load_embedding_store;
use jspg_core::semantic::remote::{fetch_store, EmbeddingClient, DEFAULT_BATCH_SIZE};
use jspg_core::{
    load_resources, retrieve_topk, run_eval, sim_pinyin, CharCost, CharSimCache, Dictionary, EmbeddingStore,
    EvalRecord, Keyword, MissingSemanticPolicy, ResourcePaths, ResourceTable, RetrievalConfig, SimilarityKind,
};
use log::{info, warn};

use crate::{
    AlignArgs, AlignKind, EmbeddingArgs, EvalArgs, Failure, Feature, FusionArgs, MissingSemantic, RetrieveArgs,
};

fn load_table(dir: &Path) -> Result<Arc<ResourceTable>, Failure> {
    let table = load_resources(&ResourcePaths::from_dir(dir)).map_err(Failure::data)?;
    for src in table.provenance() {
        info!("{}: {} rows from {}", src.kind, src.rows, src.source);
    }
    Ok(Arc::new(table))
}

fn load_dictionary(path: &Path, table: &ResourceTable) -> Result<Dictionary, Failure> {
    let dict = Dictionary::load(path).map_err(Failure::data)?;
    let unknown = dict
        .keywords()
        .iter()
        .filter(|w| w.chars().iter().any(|&c| table.lookup(c).is_none()))
        .count();
    if unknown > 0 {
        warn!(
            "{unknown} of {} keywords contain characters missing from the resource tables",
            dict.len()
        );
    }
    Ok(dict)
}

fn config(args: &FusionArgs, top_k: usize, have_embeddings: bool) -> Result<RetrievalConfig, Failure> {
    let (alpha, beta, semantic_enabled) = match args.feature {
        Feature::Full => (args.alpha, args.beta, true),
        Feature::Semantic => (args.alpha, 1.0, true),
        Feature::Pinyin => (1.0, 0.0, false),
        Feature::Glyph => (0.0, 0.0, false),
        Feature::Pg => (args.alpha, 0.0, false),
    };
    let cfg = RetrievalConfig {
        alpha,
        beta,
        top_k,
        semantic_enabled,
        missing_semantic_policy: match args.missing_semantic {
            MissingSemantic::Renormalize => MissingSemanticPolicy::RenormalizeToPgOnly,
            MissingSemantic::Zero => MissingSemanticPolicy::TreatAsZero,
        },
    };
    cfg.validate().map_err(Failure::usage)?;
    if semantic_enabled && !have_embeddings {
        if args.feature == Feature::Semantic {
            return Err(Failure::usage(anyhow!(
                "--feature semantic needs --embeddings or --embed-url"
            )));
        }
        warn!("no embeddings given; semantic scores are missing for every keyword");
    }
    Ok(cfg)
}

fn embedding_store(args: &EmbeddingArgs, dict: &Dictionary, dataset: &[EvalRecord]) -> Result<EmbeddingStore, Failure> {
    if let Some(path) = &args.embeddings {
        let store = load_embedding_store(path).map_err(Failure::data)?;
        info!(
            "{} keyword and {} query embeddings",
            store.keyword_count(),
            store.query_count()
        );
        return Ok(store);
    }
    if let Some(url) = &args.embed_url {
        let client = EmbeddingClient::new(url, Duration::from_secs(args.embed_timeout), args.embed_retries)
            .map_err(Failure::usage)?;
        let queries = dataset.iter().map(|r| &r.hypotheses);
        return fetch_store(&client, dict.keywords(), queries, DEFAULT_BATCH_SIZE).map_err(Failure::data);
    }
    Ok(EmbeddingStore::default())
}

fn has_embeddings(args: &EmbeddingArgs) -> bool {
    args.embeddings.is_some() || args.embed_url.is_some()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::data(anyhow!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::data(anyhow!("cannot write to stdout: {e}"))),
    }
}

pub fn retrieve(resources: &Path, args: RetrieveArgs) -> Result<(), Failure> {
    let cfg = config(&args.fusion, args.top_k, has_embeddings(&args.embeddings))?;
    let table = load_table(resources)?;
    let dict = load_dictionary(&args.dict, &table)?;
    let dataset = load_dataset(&args.input).map_err(Failure::data)?;
    let store = embedding_store(&args.embeddings, &dict, &dataset)?;
    let cache = CharSimCache::new(table);

    let mut out = String::new();
    for rec in &dataset {
        let ranked = retrieve_topk(&cache, &store, &dict, &rec.hypotheses, &cfg).map_err(Failure::data)?;
        out.push_str(&retrieval_json_line(rec.utterance_id(), &ranked));
        out.push('\n');
    }
    info!(
        "{} utterances, {} cached character pairs",
        dataset.len(),
        cache.cached_pairs()
    );
    write_output(args.output.as_deref(), &out)
}

pub fn eval(resources: &Path, args: EvalArgs) -> Result<(), Failure> {
    validate_k_list(&args.k_list).map_err(Failure::usage)?;
    let top_k = *args.k_list.last().expect("validated non-empty");
    let cfg = config(&args.fusion, top_k, has_embeddings(&args.embeddings))?;
    let table = load_table(resources)?;
    let dict = load_dictionary(&args.dict, &table)?;
    let dataset = load_dataset(&args.dataset).map_err(Failure::data)?;
    let store = embedding_store(&args.embeddings, &dict, &dataset)?;
    let cache = CharSimCache::new(table);

    if !args.ablation_alpha.is_empty() {
        let rows = ablation_sweep(
            &cache,
            &store,
            &dict,
            &dataset,
            &cfg,
            &args.ablation_alpha,
            &args.ablation_beta,
            &args.k_list,
        )
        .map_err(Failure::usage)?;
        print!("{}", format_ablation_table(&rows, &args.k_list));
        if let Some(path) = &args.csv {
            let mut csv = format!("alpha,beta,{CSV_HEADER}\n");
            for row in &rows {
                for line in row.report.to_csv().lines().skip(1) {
                    let _ = writeln!(csv, "{},{},{line}", row.alpha, row.beta);
                }
            }
            write_output(Some(path), &csv)?;
        }
        return Ok(());
    }

    let run = run_eval(&cache, &store, &dict, &dataset, &cfg, &args.k_list).map_err(Failure::data)?;
    for w in &run.report.warnings {
        warn!("{w}");
    }
    if !run.report.is_monotone() {
        return Err(Failure::Internal(anyhow!("Recall@K decreased with K")));
    }
    print!("{}", run.report.to_table());
    if let Some(path) = &args.csv {
        write_output(Some(path), &run.report.to_csv())?;
    }
    if let Some(path) = &args.report {
        let mut text = run.utterance_json_lines(&dataset).join("\n");
        text.push('\n');
        write_output(Some(path), &text)?;
    }
    Ok(())
}

fn describe(table: &ResourceTable, c: char) -> String {
    match table.lookup(c) {
        Some(rec) if !rec.pinyin_readings.is_empty() => format!("{c} [{}]", rec.pinyin_readings.join(",")),
        Some(_) => format!("{c} [no pinyin]"),
        None => format!("{c} [not in tables]"),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"))
}

pub fn char_sim(resources: &Path, a: char, b: char) -> Result<(), Failure> {
    let table = load_table(resources)?;
    let g = glyph_breakdown(&table, a, b);
    let mut out = String::new();
    let _ = writeln!(out, "{}  {}", describe(&table, a), describe(&table, b));
    let _ = writeln!(out, "sim_p        {:.4}", sim_pinyin(&table, a, b));
    let _ = writeln!(out, "sim_g        {}", fmt_opt(Some(g.mean().unwrap_or(0.0))));
    let _ = writeln!(out, "  four_corner  {}", fmt_opt(g.four_corner));
    let _ = writeln!(out, "  structure    {}", fmt_opt(g.structure));
    let _ = writeln!(out, "  stroke_edit  {}", fmt_opt(g.stroke_edit));
    let _ = writeln!(out, "  stroke_lcs   {}", fmt_opt(g.stroke_lcs));
    if a != b && (table.lookup(a).is_none() || table.lookup(b).is_none()) {
        out.push_str("note: a character is missing from the tables; its similarities are 0\n");
    }
    write_output(None, &out)
}

fn cell(v: f64) -> String {
    if v.is_infinite() {
        "∞".to_owned()
    } else {
        format!("{v:.2}")
    }
}

pub fn align(resources: &Path, args: AlignArgs) -> Result<(), Failure> {
    let w = Keyword::new(args.keyword.as_str()).map_err(Failure::usage)?;
    let q: Vec<char> = args.hypothesis.chars().collect();
    let table = load_table(resources)?;
    let cache = CharSimCache::new(table);
    let kind = match args.kind {
        AlignKind::Pinyin => SimilarityKind::Pinyin,
        AlignKind::Glyph => SimilarityKind::Glyph,
    };
    let costs = CharCost::new(&cache, kind);
    let full = Aligner::default().align_full(&costs, &w, &q);

    let mut out = String::from("      ");
    for c in w.chars() {
        let _ = write!(out, "{c:>6}");
    }
    out.push('\n');
    for i in 0..full.matrix.rows() {
        let label = if i == 0 { ' ' } else { q[i - 1] };
        let _ = write!(out, "{label:<2}{:>4}", cell(full.matrix.get(i, 0)));
        for &v in &full.matrix.row(i)[1..] {
            let _ = write!(out, "{:>6}", cell(v));
        }
        out.push('\n');
    }
    let r = &full.result;
    if args.trace {
        for step in r.trace.iter().flatten() {
            let what = match step.mv {
                Move::Diagonal => format!("{} ~ {}", q[step.i - 1], w.chars()[step.j - 1]),
                Move::Vertical => format!("skip hypothesis {}", q[step.i - 1]),
                Move::Horizontal => format!("skip keyword {}", w.chars()[step.j - 1]),
            };
            let _ = writeln!(out, "({}, {})  {what}", step.i, step.j);
        }
    }
    let _ = writeln!(out, "cost {}  RL {:.4}", cell(r.cost), r.rl);
    write_output(None, &out)
}

pub fn validate_resources(resources: &Path) -> Result<(), Failure> {
    let table = load_table(resources)?;
    let mut out = String::new();
    for src in table.provenance() {
        let _ = writeln!(out, "{:<12} {:>6} rows  {}", src.kind.to_string(), src.rows, src.source);
    }
    let _ = writeln!(out, "{} characters", table.len());
    for kind in TableKind::ALL {
        let _ = writeln!(out, "  {:<12} {:>6}", kind.to_string(), table.coverage(kind));
    }
    write_output(None, &out)
}
