#![allow(dead_code)]

use std::path::PathBuf;

use histgraph_core::graph::EdgeScoreConfig;
use histgraph_core::index::{build_index, read_corpus_dir, PositionalIndex};
use histgraph_core::linker::LinkerDictionary;
use histgraph_core::log::{parse_log, Timestamp};
use histgraph_core::session::SegmentationConfig;
use histgraph_core::store::{BatchContext, Store};
use histgraph_core::ExtractionConfig;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn dictionary() -> LinkerDictionary {
    LinkerDictionary::load(&fixtures().join("dictionary.tsv")).unwrap()
}

pub fn corpus_index() -> PositionalIndex {
    build_index(read_corpus_dir(&fixtures().join("corpus")).unwrap()).unwrap()
}

pub fn context<'a>(dict: &'a LinkerDictionary, index: &'a PositionalIndex) -> BatchContext<'a> {
    BatchContext {
        linker: dict,
        source: index,
        segmentation: SegmentationConfig::default(),
        extraction: ExtractionConfig::default(),
        edges: EdgeScoreConfig::default(),
    }
}

pub fn epoch() -> Timestamp {
    Timestamp::from_millis(0).unwrap()
}

pub fn ingest_file(store: &mut Store, name: &str) -> usize {
    let text = std::fs::read_to_string(fixtures().join(name)).unwrap();
    store
        .ingest(&parse_log(&text).unwrap(), &SegmentationConfig::default())
        .unwrap()
        .ingested
}

/// Both fixture users ingested and every graph built.
pub fn built_store(dict: &LinkerDictionary, index: &PositionalIndex) -> Store {
    let mut store = Store::open_in_memory().unwrap();
    ingest_file(&mut store, "ana.jsonl");
    ingest_file(&mut store, "ben.jsonl");
    store.batch_recompute(epoch(), &context(dict, index)).unwrap();
    store
}
