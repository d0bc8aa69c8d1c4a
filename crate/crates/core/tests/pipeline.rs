mod common;

use std::path::Path;

use histgraph_core::extract::extract_session_entities;
use histgraph_core::graph::GraphDocument;
use histgraph_core::index::PositionalIndex;
use histgraph_core::store::Store;
use histgraph_core::ExtractionConfig;

use common::*;

const SESSIONS: [&str; 3] = ["s-q01", "s-q05", "s-q09"];

#[test]
fn fixture_segments_into_three_sessions() {
    let mut store = Store::open_in_memory().unwrap();
    assert_eq!(ingest_file(&mut store, "ana.jsonl"), 12);
    let ids: Vec<String> = store.user_sessions("ana").unwrap().into_iter().map(|s| s.session_id).collect();
    assert_eq!(ids, vec!["s-q09", "s-q05", "s-q01"]);
}

/// Values worked out by hand from the four snippets of q05.
#[test]
fn festival_query_entities_by_hand() {
    let mut store = Store::open_in_memory().unwrap();
    ingest_file(&mut store, "ana.jsonl");
    let session = store.session("s-q05").unwrap().unwrap();
    let snippets = store.session_snippets(&session).unwrap();
    let dict = dictionary();
    let out = extract_session_entities(&session, &snippets, &dict, &ExtractionConfig::default()).unwrap();

    let q05 = out.ranked.iter().find(|r| r.key == "q05").unwrap();
    let got: Vec<(&str, u32, f64)> = q05
        .entities
        .iter()
        .map(|c| (c.entity_id.as_str(), c.freq, c.q_score))
        .collect();
    let want = [
        ("E_LONDON", 6, 6.0 / 1.1),
        ("E_HYDE_PARK", 2, 2.0 / 0.6),
        ("E_MUSIC_FESTIVAL", 6, 6.0 / 2.0),
        ("E_AMERICANA", 1, 1.0 / 0.8),
        ("E_CONCERT", 2, 2.0 / 2.3),
    ];
    assert_eq!(got.len(), want.len());
    for ((id, freq, q), (wid, wfreq, wq)) in got.iter().zip(want) {
        assert_eq!((*id, *freq), (wid, wfreq));
        assert!((q - wq).abs() <= 1e-12 * wq, "{id}: {q} vs {wq}");
    }
    // Pop and UK are linked but too short to be nodes.
    assert!(out.mention_index.contains_key("E_POP"));
    assert!(out.mention_index.contains_key("E_UK"));
}

fn build_docs(index: &PositionalIndex) -> Vec<String> {
    let dict = dictionary();
    let mut store = Store::open_in_memory().unwrap();
    ingest_file(&mut store, "ana.jsonl");
    store.batch_recompute(epoch(), &context(&dict, index)).unwrap();
    SESSIONS
        .iter()
        .map(|s| store.graph_document(s).unwrap().unwrap())
        .collect()
}

#[test]
fn graphs_match_golden_files() {
    let docs = build_docs(&corpus_index());
    let golden = fixtures().join("golden");
    for (sid, doc) in SESSIONS.iter().zip(&docs) {
        let path = golden.join(format!("{sid}.json"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&path, doc).unwrap();
        }
        let want = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1 to create)", path.display()));
        assert_eq!(doc, &want, "graph for {sid} differs from {}", path.display());
    }
}

#[test]
fn festival_graph_contains_expected_nodes() {
    let docs = build_docs(&corpus_index());
    let doc = GraphDocument::from_json(&docs[1]).unwrap();
    assert!(doc.node("E_LONDON").is_some());
    assert!(doc.node("E_MUSIC_FESTIVAL").is_some());
    assert!(doc.node("E_POP").is_none());
    // London co-occurs with Hyde Park in the corpus, so the pair has an edge.
    assert!(doc.edges.iter().any(|e| e.a == "E_HYDE_PARK" && e.b == "E_LONDON"));
}

#[test]
fn saved_index_gives_identical_graphs() {
    let index = corpus_index();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.idx");
    index.save(&path).unwrap();
    let loaded = PositionalIndex::load(&path).unwrap();
    assert_eq!(build_docs(&loaded), build_docs(&index));
}

#[test]
fn node_snippets_ordered_by_query_then_rank() {
    let dict = dictionary();
    let index = corpus_index();
    let store = built_store(&dict, &index);
    let items = store.node_snippets("s-q09", "E_BRITISH_MUSEUM").unwrap();
    let ids: Vec<&str> = items.iter().map(|s| s.snippet_id.as_str()).collect();
    assert_eq!(ids, vec!["q09#1", "q09#2", "q12#1", "q12#3"]);
    let doc = GraphDocument::from_json(&store.graph_document("s-q09").unwrap().unwrap()).unwrap();
    assert_eq!(doc.node("E_BRITISH_MUSEUM").unwrap().snippets, ids);
}

#[test]
fn store_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.db");
    let dict = dictionary();
    let index = corpus_index();
    {
        let mut store = Store::open(&path).unwrap();
        ingest_file(&mut store, "ana.jsonl");
        store.batch_recompute(epoch(), &context(&dict, &index)).unwrap();
    }
    let mut store = Store::open(Path::new(&path)).unwrap();
    let report = store.batch_recompute(epoch(), &context(&dict, &index)).unwrap();
    assert_eq!(report.graphs_written, 0);
    assert!(store.integrity_problems().unwrap().is_empty());
}
