mod common;

use common::*;
use jspg_core::eval::{load_dataset, parse_dataset, EvalError, CSV_HEADER};
use jspg_core::{run_eval, CharSimCache, Dictionary, EmbeddingStore, RetrievalConfig};

const TOY: &str = r#"{"id":"a","hypotheses":["关于雨音的识别"],"gold_keywords":["语音识别"]}
{"id":"b","hypotheses":["今天天气预报说有雨","今天天汽预报"],"gold_keywords":["天气预报","下雨"]}
{"id":"c","hypotheses":["我们去北京"],"gold_keywords":[]}
"#;

fn toy_run(k_list: &[usize]) -> jspg_core::eval::EvalRun {
    let cache = CharSimCache::new(shipped_table());
    let dict = Dictionary::from_texts(["语音识别", "天气预报", "下雨", "北京大学"]).unwrap();
    let dataset = parse_dataset(TOY, "toy.jsonl").unwrap();
    let cfg = RetrievalConfig {
        beta: 0.0,
        semantic_enabled: false,
        ..Default::default()
    };
    run_eval(&cache, &EmbeddingStore::default(), &dict, &dataset, &cfg, k_list).unwrap()
}

#[test]
fn toy_corpus_recall_by_hand() {
    let run = toy_run(&[1, 2, 5]);
    let r = &run.report;
    // Three gold instances; 'c' has no gold keywords and adds nothing to the micro totals.
    assert_eq!(r.rows.iter().map(|row| row.total).collect::<Vec<_>>(), [3, 3, 3]);
    let at5 = r.rows.last().unwrap();
    assert_eq!((at5.hits, at5.recall_micro), (3, 1.0));
    assert!(r.is_monotone());
    assert_eq!(run.rankings[0].1[0].keyword.text(), "语音识别");
    assert_eq!(run.rankings[1].1[0].keyword.text(), "天气预报");
}

#[test]
fn k_beyond_dictionary_size_is_allowed() {
    let run = toy_run(&[1, 100]);
    assert_eq!(run.report.recall_micro(100), Some(1.0));
    assert!(run.rankings.iter().all(|(_, r)| r.len() == 4));
}

#[test]
fn csv_has_header_and_one_row_per_k() {
    let csv = toy_run(&[1, 2, 5]).report.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("5,1.000000,"), "{}", lines[3]);
}

#[test]
fn utterance_lines_follow_dataset_order() {
    let dataset = parse_dataset(TOY, "toy.jsonl").unwrap();
    let run = toy_run(&[1, 5]);
    let lines = run.utterance_json_lines(&dataset);
    let ids: Vec<String> = lines
        .iter()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["utterance_id"]
                .as_str()
                .unwrap()
                .to_owned()
        })
        .collect();
    assert_eq!(ids, ["a", "b", "c"]);
}

#[test]
fn k_list_must_be_ascending_and_positive() {
    let cache = CharSimCache::new(example_table());
    let dict = Dictionary::from_texts(["语音识别"]).unwrap();
    let dataset = parse_dataset(TOY, "toy.jsonl").unwrap();
    let store = EmbeddingStore::default();
    let cfg = RetrievalConfig::default();
    for bad in [&[][..], &[0, 1], &[5, 3], &[2, 2]] {
        assert!(
            matches!(
                run_eval(&cache, &store, &dict, &dataset, &cfg, bad),
                Err(EvalError::InvalidK(_))
            ),
            "{bad:?}"
        );
    }
}

#[test]
fn dataset_errors_carry_line_numbers() {
    let bad = "{\"id\":\"a\",\"hypotheses\":[\"x\"]}\n{\"id\":\"a\",\"hypotheses\":[\"y\"]}\n";
    let err = parse_dataset(bad, "d.jsonl").unwrap_err();
    assert!(matches!(err, EvalError::Dataset { line: 2, .. }), "{err}");
    let err = parse_dataset("{\"id\":\"a\",\"hypotheses\":[]}\n", "d.jsonl").unwrap_err();
    assert!(matches!(err, EvalError::Dataset { line: 1, .. }), "{err}");
    let err = parse_dataset("not json\n", "d.jsonl").unwrap_err();
    assert!(err.to_string().contains("d.jsonl"), "{err}");
}

#[test]
fn empty_dataset_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    std::fs::write(&path, "\n").unwrap();
    assert!(matches!(load_dataset(&path), Err(EvalError::EmptyDataset(_))));
}

#[test]
fn corpus_without_gold_reports_full_recall_with_warning() {
    let cache = CharSimCache::new(example_table());
    let dict = Dictionary::from_texts(["语音识别"]).unwrap();
    let dataset = parse_dataset("{\"id\":\"a\",\"hypotheses\":[\"关于\"]}\n", "d.jsonl").unwrap();
    let run = run_eval(
        &cache,
        &EmbeddingStore::default(),
        &dict,
        &dataset,
        &RetrievalConfig::default(),
        &[1],
    )
    .unwrap();
    assert_eq!(run.report.recall_micro(1), Some(1.0));
    assert!(!run.report.warnings.is_empty());
}
