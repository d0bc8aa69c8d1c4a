//! Offline recompute: re-segment, re-extract, re-score and persist graphs
//! for sessions touched since a cut-off.

use std::time::{Duration, Instant};

use rusqlite::{params, Connection};
use serde::Serialize;

use super::{load_session, resegment_user, Store, StoreError};
use crate::extract::{extract_session_entities, ExtractionConfig};
use crate::graph::{build_session_graph, EdgeScoreConfig, KnowledgeGraph};
use crate::index::CooccurrenceSource;
use crate::linker::EntityLinker;
use crate::log::Timestamp;
use crate::session::{SegmentationConfig, Session};

/// Everything a graph build needs besides the store.
pub struct BatchContext<'a> {
    pub linker: &'a dyn EntityLinker,
    pub source: &'a dyn CooccurrenceSource,
    pub segmentation: SegmentationConfig,
    pub extraction: ExtractionConfig,
    pub edges: EdgeScoreConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BatchReport {
    pub sessions_rebuilt: usize,
    /// Graphs whose stored document changed (or was missing).
    pub graphs_written: usize,
    pub duration: Duration,
}

impl Store {
    /// Builds the graph for one session without touching the store.
    pub fn build_graph(&self, session: &Session, ctx: &BatchContext<'_>) -> Result<KnowledgeGraph, String> {
        let snippets = self.session_snippets(session).map_err(|e| e.to_string())?;
        let entities = extract_session_entities(session, &snippets, ctx.linker, &ctx.extraction)
            .map_err(|e| e.to_string())?;
        build_session_graph(&entities, ctx.source, &ctx.edges).map_err(|e| e.to_string())
    }

    /// Rebuilds graphs of every session with a record at or after `since`.
    /// Each session commits in its own transaction; failed sessions are
    /// rolled back and listed in [`StoreError::PartialBatch`].
    pub fn batch_recompute(&mut self, since: Timestamp, ctx: &BatchContext<'_>) -> Result<BatchReport, StoreError> {
        let started = Instant::now();
        let _lock = self.try_writer_lock()?;

        let users: Vec<String> = self
            .conn
            .prepare("SELECT DISTINCT user_id FROM query_records WHERE ts_ms >= ?1 ORDER BY user_id")?
            .query_map([since.millis()], |r| r.get(0))?
            .collect::<Result<_, _>>()?;

        let mut touched = Vec::new();
        for user in &users {
            let tx = self.conn.transaction()?;
            let sessions = resegment_user(&tx, user, &ctx.segmentation)?;
            tx.commit()?;
            touched.extend(sessions.into_iter().filter(|s| s.end >= since));
        }

        let mut report = BatchReport::default();
        let mut failed = Vec::new();
        for session in &touched {
            report.sessions_rebuilt += 1;
            let graph = match self.build_graph(session, ctx) {
                Ok(g) => g,
                Err(e) => {
                    tracing::warn!(session = %session.session_id, error = %e, "graph build failed");
                    failed.push((session.session_id.clone(), e));
                    continue;
                }
            };
            let document = graph.to_document().to_canonical_json();
            let current = self.graph_document(&session.session_id)?;
            if current.as_deref() == Some(document.as_str()) {
                continue;
            }
            let tx = self.conn.transaction()?;
            match persist_graph(&tx, &graph, &document) {
                Ok(()) => {
                    tx.commit()?;
                    report.graphs_written += 1;
                }
                Err(e) => {
                    drop(tx);
                    failed.push((session.session_id.clone(), e.to_string()));
                }
            }
        }
        report.duration = started.elapsed();

        if failed.is_empty() {
            Ok(report)
        } else {
            Err(StoreError::PartialBatch { failed, report })
        }
    }
}

fn persist_graph(conn: &Connection, graph: &KnowledgeGraph, document: &str) -> Result<(), StoreError> {
    let sid = &graph.session_id;
    if load_session(conn, sid)?.is_none() {
        return Err(super::not_found("session", sid));
    }
    conn.execute("DELETE FROM graphs WHERE session_id = ?1", [sid])?;
    conn.execute(
        "INSERT INTO graphs (session_id, document) VALUES (?1, ?2)",
        params![sid, document],
    )?;
    for n in &graph.nodes {
        conn.execute(
            "INSERT INTO entities (session_id, entity_id, label, q_score, freq, n, avg_fel)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![sid, n.entity_id, n.label, n.q_score, n.freq, n.n, n.avg_fel],
        )?;
        for snippet in graph.node_snippets.get(&n.entity_id).into_iter().flatten() {
            conn.execute(
                "INSERT INTO entity_snippets (session_id, entity_id, snippet_id) VALUES (?1, ?2, ?3)",
                params![sid, n.entity_id, snippet],
            )?;
        }
    }
    for e in &graph.edges {
        conn.execute(
            "INSERT INTO edges (session_id, entity_a, entity_b, raw_count, score) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![sid, e.entity_a, e.entity_b, e.raw_count as i64, e.score],
        )?;
    }
    Ok(())
}
