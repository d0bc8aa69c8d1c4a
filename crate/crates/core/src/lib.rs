//! Search-history knowledge graphs.
//!
//! The pipeline: parse query logs ([`log`]), split each user's history into
//! time-gap sessions ([`session`]), link entities in result snippets and
//! rank them ([`linker`], [`extract`]), weight entity pairs by corpus
//! co-occurrence ([`index`], [`graph`]), then persist and serve the graphs
//! ([`store`], [`api`]).

pub mod api;
pub mod extract;
pub mod graph;
pub mod index;
pub mod linker;
pub mod log;
pub mod session;
pub mod store;
pub mod tokenize;

pub use extract::{
    avg_fel, extract_session_entities, q_score, select_top_entities, EntityCandidate, ExtractError,
    ExtractionConfig, ScoringScope, SessionEntities,
};
pub use graph::{
    build_session_graph, edge_score, subgraph_of, BranchMode, EdgeScoreConfig, GraphDocument,
    GraphEdge, GraphError, KnowledgeGraph,
};
pub use index::{build_index, CooccurrenceSource, CorpusDocument, IndexError, PositionalIndex};
pub use linker::{extract_mentions, EntityLinker, EntityMention, LinkerDictionary};
pub use log::{parse_log, parse_log_line, LogEntry, LogError, QueryRecord, Snippet, Timestamp};
pub use session::{segment_sessions, SegmentationConfig, Session};
pub use store::{BatchContext, BatchReport, Store, StoreError};
