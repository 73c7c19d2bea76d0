//! The JSONL and HTTP contracts shared with the embedding exporter.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use jspg_core::semantic::remote::{fetch_store, EmbeddingClient};
use jspg_core::semantic::{load_embedding_store, QUERY_INSTRUCTION};
use jspg_core::{build_query_text, semantic_score, HypothesisSet, Keyword};

#[test]
fn query_text_matches_exporter_bytes() {
    let q = HypothesisSet::new("u", vec!["关于雨音的识别".into(), "关于语音的识别".into()]).unwrap();
    let expected = "Given a list of candidate transcriptions predicted by a speech recognition model as a query, \
retrieve keywords relevant to the query. The candidate transcriptions are: 关于雨音的识别, 关于语音的识别.";
    assert_eq!(build_query_text(&q), expected);
    assert!(expected.starts_with(QUERY_INSTRUCTION));
}

#[test]
fn exported_jsonl_round_trips_into_scores() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.jsonl");
    std::fs::write(
        &path,
        concat!(
            r#"{"kind":"keyword","key":"语音识别","embedding":[0.6,0.8]}"#,
            "\n",
            r#"{"kind":"keyword","key":"天气","embedding":[0.8,-0.6]}"#,
            "\n",
            r#"{"kind":"query","key":"u","embedding":[0.6,0.8]}"#,
            "\n"
        ),
    )
    .unwrap();
    let store = load_embedding_store(&path).unwrap();
    assert_eq!(
        (store.keyword_count(), store.query_count(), store.dim()),
        (2, 1, Some(2))
    );
    let q = HypothesisSet::new("u", vec!["x".into()]).unwrap();
    let same = semantic_score(&store, &q, &Keyword::new("语音识别").unwrap()).unwrap();
    assert!((same - 1.0).abs() < 1e-12);
    let orth = semantic_score(&store, &q, &Keyword::new("天气").unwrap()).unwrap();
    assert!(orth.abs() < 1e-12);
    assert_eq!(semantic_score(&store, &q, &Keyword::new("缺失").unwrap()), None);
}

#[test]
fn dimension_mismatch_names_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.jsonl");
    std::fs::write(
        &path,
        "{\"kind\":\"keyword\",\"key\":\"a\",\"embedding\":[1,0]}\n{\"kind\":\"query\",\"key\":\"u\",\"embedding\":[1,0,0]}\n",
    )
    .unwrap();
    let msg = load_embedding_store(&path).unwrap_err().to_string();
    assert!(msg.contains("emb.jsonl") && msg.contains('2'), "{msg}");
}

/// Serves `/embed` by embedding each text as `[len, 1]`.
fn serve(requests: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
            let embeddings: Vec<Vec<f64>> = req["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| vec![t.as_str().unwrap().chars().count() as f64, 1.0])
                .collect();
            let out = serde_json::json!({ "embeddings": embeddings }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}",
                out.len()
            )
            .unwrap();
        }
    });
    format!("http://{addr}")
}

#[test]
fn http_service_fills_a_store() {
    let url = serve(1);
    let client = EmbeddingClient::with_defaults(&url).unwrap();
    let keywords = vec![Keyword::new("语音识别").unwrap(), Keyword::new("天气").unwrap()];
    let utterances = vec![HypothesisSet::new("u", vec!["关于".into()]).unwrap()];
    let store = fetch_store(&client, &keywords, &utterances, 64).unwrap();
    assert_eq!(store.keyword("语音识别").unwrap().values(), [4.0, 1.0]);
    assert_eq!(store.keyword("天气").unwrap().values(), [2.0, 1.0]);
    let q_len = build_query_text(&utterances[0]).chars().count() as f64;
    assert_eq!(store.query("u").unwrap().values(), [q_len, 1.0]);
}
