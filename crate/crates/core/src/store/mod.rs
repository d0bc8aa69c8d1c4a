//! Relational persistence for records, sessions, graphs and groups,
//! backed by an embedded SQLite database.
//!
//! Writers (ingestion and batch recompute) take an advisory lock on
//! `<store>.lock` so only one runs at a time across processes. Readers are
//! never blocked and always see committed data.

mod batch;
mod groups;
mod schema;

use std::fs::File;
use std::path::{Path, PathBuf};

use rusqlite::{params, Connection, OptionalExtension, Transaction};
use serde::{Deserialize, Serialize};

use crate::log::{LogEntry, LogError, QueryRecord, Snippet, Timestamp};
use crate::session::{segment_sessions, SegmentationConfig, Session, SessionError};

pub use batch::{BatchContext, BatchReport};
pub use groups::{Group, ResultTag};
pub use schema::SCHEMA_SQL;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("user `{user_id}` is not a member of group `{group_id}`")]
    Permission { user_id: String, group_id: String },
    #[error("another writer holds the store lock")]
    Busy,
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("batch failed for sessions: {}", failed.iter().map(|(id, _)| id.as_str()).collect::<Vec<_>>().join(", "))]
    PartialBatch {
        failed: Vec<(String, String)>,
        report: BatchReport,
    },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Sql(#[from] rusqlite::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn not_found(kind: &'static str, id: &str) -> StoreError {
    StoreError::NotFound {
        kind,
        id: id.to_string(),
    }
}

/// Held while a writer runs; dropping it releases the lock.
pub struct WriterLock {
    _file: Option<File>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub ingested: usize,
    /// Lines whose record was already stored with identical content.
    pub unchanged: usize,
    pub users: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub user_id: String,
    pub first_query: String,
    pub last_query: String,
    pub start: Timestamp,
    pub end: Timestamp,
    pub query_count: usize,
}

/// A snippet together with the query it answered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetView {
    pub snippet_id: String,
    pub record_id: String,
    pub query: String,
    pub timestamp: Timestamp,
    pub rank: u8,
    pub title: String,
    pub body: String,
    pub url: String,
    pub interaction: crate::log::Interaction,
}

pub struct Store {
    conn: Connection,
    path: Option<PathBuf>,
}

impl Store {
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.busy_timeout(std::time::Duration::from_secs(5))?;
        Self::init(conn, Some(path.to_path_buf()))
    }

    pub fn open_in_memory() -> Result<Self, StoreError> {
        Self::init(Connection::open_in_memory()?, None)
    }

    fn init(conn: Connection, path: Option<PathBuf>) -> Result<Self, StoreError> {
        conn.pragma_update(None, "foreign_keys", "ON")?;
        conn.execute_batch(SCHEMA_SQL)?;
        Ok(Store { conn, path })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Takes the cross-process writer lock, failing fast if it is held.
    pub fn try_writer_lock(&self) -> Result<WriterLock, StoreError> {
        let Some(path) = &self.path else {
            return Ok(WriterLock { _file: None });
        };
        let mut lock_path = path.clone().into_os_string();
        lock_path.push(".lock");
        let file = File::options()
            .create(true)
            .truncate(false)
            .write(true)
            .open(PathBuf::from(lock_path))?;
        match file.try_lock() {
            Ok(()) => Ok(WriterLock { _file: Some(file) }),
            Err(std::fs::TryLockError::WouldBlock) => Err(StoreError::Busy),
            Err(std::fs::TryLockError::Error(e)) => Err(e.into()),
        }
    }

    pub fn add_user(&self, user_id: &str) -> Result<(), StoreError> {
        if user_id.is_empty() {
            return Err(StoreError::Input("empty user id".into()));
        }
        self.conn
            .execute("INSERT OR IGNORE INTO users (user_id) VALUES (?1)", [user_id])?;
        Ok(())
    }

    pub fn user_exists(&self, user_id: &str) -> Result<bool, StoreError> {
        Ok(self
            .conn
            .query_row("SELECT 1 FROM users WHERE user_id = ?1", [user_id], |_| Ok(()))
            .optional()?
            .is_some())
    }

    /// Stores records and snippets, then re-segments every user that
    /// received records. Re-ingesting an identical record is a no-op; a
    /// record id reused with different content is a conflict.
    pub fn ingest(
        &mut self,
        entries: &[LogEntry],
        seg: &SegmentationConfig,
    ) -> Result<IngestReport, StoreError> {
        let _lock = self.try_writer_lock()?;
        let tx = self.conn.transaction()?;
        let mut report = IngestReport::default();
        let mut users = std::collections::BTreeSet::new();
        for entry in entries {
            let r = &entry.record;
            match load_record(&tx, &r.record_id)? {
                Some(existing) => {
                    let snippets = load_record_snippets(&tx, &r.record_id)?;
                    if existing != *r || snippets != entry.snippets {
                        return Err(StoreError::Conflict(format!(
                            "record `{}` already stored with different content",
                            r.record_id
                        )));
                    }
                    report.unchanged += 1;
                }
                None => {
                    insert_entry(&tx, entry)?;
                    report.ingested += 1;
                    users.insert(r.user_id.clone());
                }
            }
        }
        for user in &users {
            resegment_user(&tx, user, seg)?;
        }
        tx.commit()?;
        report.users = users.len();
        Ok(report)
    }

    pub fn user_records(&self, user_id: &str) -> Result<Vec<QueryRecord>, StoreError> {
        user_records(&self.conn, user_id)
    }

    pub fn session(&self, session_id: &str) -> Result<Option<Session>, StoreError> {
        load_session(&self.conn, session_id)
    }

    /// Every session of the user, most recent first.
    pub fn user_sessions(&self, user_id: &str) -> Result<Vec<Session>, StoreError> {
        let ids: Vec<String> = self
            .conn
            .prepare(
                "SELECT session_id FROM sessions WHERE user_id = ?1
                 ORDER BY end_ms DESC, session_id DESC",
            )?
            .query_map([user_id], |r| r.get(0))?
            .collect::<Result<_, _>>()?;
        ids.iter()
            .map(|id| Ok(load_session(&self.conn, id)?.expect("listed session exists")))
            .collect()
    }

    pub fn session_summary(&self, session: &Session) -> Result<SessionSummary, StoreError> {
        let query_of = |id: &str| -> Result<String, StoreError> {
            Ok(self.conn.query_row(
                "SELECT query_text FROM query_records WHERE record_id = ?1",
                [id],
                |r| r.get(0),
            )?)
        };
        Ok(SessionSummary {
            session_id: session.session_id.clone(),
            user_id: session.user_id.clone(),
            first_query: query_of(&session.records[0])?,
            last_query: query_of(session.records.last().unwrap())?,
            start: session.start,
            end: session.end,
            query_count: session.records.len(),
        })
    }

    pub fn user_session_summaries(&self, user_id: &str) -> Result<Vec<SessionSummary>, StoreError> {
        if !self.user_exists(user_id)? {
            return Err(not_found("user", user_id));
        }
        self.user_sessions(user_id)?
            .iter()
            .map(|s| self.session_summary(s))
            .collect()
    }

    /// Snippets of every record in the session.
    pub fn session_snippets(&self, session: &Session) -> Result<Vec<Snippet>, StoreError> {
        let mut out = Vec::new();
        for id in &session.records {
            out.extend(load_record_snippets(&self.conn, id)?);
        }
        Ok(out)
    }

    /// The stored canonical graph document. `Ok(None)` when the session
    /// exists but has not been built yet.
    pub fn graph_document(&self, session_id: &str) -> Result<Option<String>, StoreError> {
        if self.session(session_id)?.is_none() {
            return Err(not_found("session", session_id));
        }
        Ok(self
            .conn
            .query_row(
                "SELECT document FROM graphs WHERE session_id = ?1",
                [session_id],
                |r| r.get(0),
            )
            .optional()?)
    }

    /// Snippets linked to a graph node, ordered by query time then rank.
    pub fn node_snippets(&self, session_id: &str, entity_id: &str) -> Result<Vec<SnippetView>, StoreError> {
        if self.session(session_id)?.is_none() {
            return Err(not_found("session", session_id));
        }
        let exists = self
            .conn
            .query_row(
                "SELECT 1 FROM entities WHERE session_id = ?1 AND entity_id = ?2",
                [session_id, entity_id],
                |_| Ok(()),
            )
            .optional()?;
        if exists.is_none() {
            return Err(not_found("entity", entity_id));
        }
        let mut stmt = self.conn.prepare(
            "SELECT sn.snippet_id, sn.record_id, q.query_text, q.ts_ms, sn.rank, sn.title, sn.body, sn.url, sn.interaction
             FROM entity_snippets es
             JOIN snippets sn ON sn.snippet_id = es.snippet_id
             JOIN query_records q ON q.record_id = sn.record_id
             WHERE es.session_id = ?1 AND es.entity_id = ?2
             ORDER BY q.ts_ms, q.record_id, sn.rank",
        )?;
        let rows = stmt.query_map([session_id, entity_id], |r| {
            Ok(SnippetView {
                snippet_id: r.get(0)?,
                record_id: r.get(1)?,
                query: r.get(2)?,
                timestamp: ts_col(r, 3)?,
                rank: r.get(4)?,
                title: r.get(5)?,
                body: r.get(6)?,
                url: r.get(7)?,
                interaction: enum_col(r, 8)?,
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// Foreign-key violations plus session/record consistency problems.
    /// Empty when the store is consistent.
    pub fn integrity_problems(&self) -> Result<Vec<String>, StoreError> {
        let mut problems: Vec<String> = self
            .conn
            .prepare("PRAGMA foreign_key_check")?
            .query_map([], |r| {
                Ok(format!(
                    "foreign key violation in {} (row {:?}) -> {}",
                    r.get::<_, String>(0)?,
                    r.get::<_, Option<i64>>(1)?,
                    r.get::<_, String>(2)?
                ))
            })?
            .collect::<Result<_, _>>()?;
        let orphans: i64 = self.conn.query_row(
            "SELECT COUNT(*) FROM query_records q
             WHERE NOT EXISTS (SELECT 1 FROM session_records sr WHERE sr.record_id = q.record_id)",
            [],
            |r| r.get(0),
        )?;
        if orphans > 0 {
            problems.push(format!("{orphans} records without a session"));
        }
        let mixed: i64 = self.conn.query_row(
            "SELECT COUNT(*) FROM session_records sr
             JOIN sessions s ON s.session_id = sr.session_id
             JOIN query_records q ON q.record_id = sr.record_id
             WHERE q.user_id <> s.user_id",
            [],
            |r| r.get(0),
        )?;
        if mixed > 0 {
            problems.push(format!("{mixed} session records owned by another user"));
        }
        Ok(problems)
    }
}

pub(crate) fn ts_col(r: &rusqlite::Row<'_>, i: usize) -> rusqlite::Result<Timestamp> {
    let ms: i64 = r.get(i)?;
    Timestamp::from_millis(ms).ok_or_else(|| {
        rusqlite::Error::FromSqlConversionFailure(i, rusqlite::types::Type::Integer, "timestamp out of range".into())
    })
}

pub(crate) fn enum_col<T: std::str::FromStr>(r: &rusqlite::Row<'_>, i: usize) -> rusqlite::Result<T> {
    let s: String = r.get(i)?;
    s.parse().map_err(|_| {
        rusqlite::Error::FromSqlConversionFailure(i, rusqlite::types::Type::Text, format!("unknown value `{s}`").into())
    })
}

fn insert_entry(tx: &Transaction<'_>, entry: &LogEntry) -> Result<(), StoreError> {
    let r = &entry.record;
    tx.execute("INSERT OR IGNORE INTO users (user_id) VALUES (?1)", [&r.user_id])?;
    tx.execute(
        "INSERT INTO query_records (record_id, user_id, query_text, objective, provider, ts_ms)
         VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
        params![
            r.record_id,
            r.user_id,
            r.query_text,
            r.objective.as_str(),
            r.provider,
            r.timestamp.millis()
        ],
    )?;
    for s in &entry.snippets {
        tx.execute(
            "INSERT INTO snippets (snippet_id, record_id, rank, title, body, url, interaction)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![s.snippet_id, s.record_id, s.rank, s.title, s.body, s.url, s.interaction.as_str()],
        )?;
    }
    Ok(())
}

fn record_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<QueryRecord> {
    Ok(QueryRecord {
        record_id: r.get(0)?,
        user_id: r.get(1)?,
        query_text: r.get(2)?,
        objective: enum_col(r, 3)?,
        provider: r.get(4)?,
        timestamp: ts_col(r, 5)?,
    })
}

fn load_record(conn: &Connection, record_id: &str) -> Result<Option<QueryRecord>, StoreError> {
    Ok(conn
        .query_row(
            "SELECT record_id, user_id, query_text, objective, provider, ts_ms
             FROM query_records WHERE record_id = ?1",
            [record_id],
            record_from_row,
        )
        .optional()?)
}

pub(crate) fn user_records(conn: &Connection, user_id: &str) -> Result<Vec<QueryRecord>, StoreError> {
    let mut stmt = conn.prepare(
        "SELECT record_id, user_id, query_text, objective, provider, ts_ms
         FROM query_records WHERE user_id = ?1 ORDER BY ts_ms, record_id",
    )?;
    let rows = stmt.query_map([user_id], record_from_row)?;
    Ok(rows.collect::<Result<_, _>>()?)
}

pub(crate) fn load_record_snippets(conn: &Connection, record_id: &str) -> Result<Vec<Snippet>, StoreError> {
    let mut stmt = conn.prepare(
        "SELECT snippet_id, record_id, rank, title, body, url, interaction
         FROM snippets WHERE record_id = ?1 ORDER BY rank",
    )?;
    let rows = stmt.query_map([record_id], |r| {
        Ok(Snippet {
            snippet_id: r.get(0)?,
            record_id: r.get(1)?,
            rank: r.get(2)?,
            title: r.get(3)?,
            body: r.get(4)?,
            url: r.get(5)?,
            interaction: enum_col(r, 6)?,
        })
    })?;
    Ok(rows.collect::<Result<_, _>>()?)
}

pub(crate) fn load_session(conn: &Connection, session_id: &str) -> Result<Option<Session>, StoreError> {
    let head = conn
        .query_row(
            "SELECT user_id, start_ms, end_ms FROM sessions WHERE session_id = ?1",
            [session_id],
            |r| Ok((r.get::<_, String>(0)?, ts_col(r, 1)?, ts_col(r, 2)?)),
        )
        .optional()?;
    let Some((user_id, start, end)) = head else {
        return Ok(None);
    };
    let records = conn
        .prepare("SELECT record_id FROM session_records WHERE session_id = ?1 ORDER BY position")?
        .query_map([session_id], |r| r.get(0))?
        .collect::<Result<_, _>>()?;
    Ok(Some(Session {
        session_id: session_id.to_string(),
        user_id,
        records,
        start,
        end,
    }))
}

/// Recomputes a user's sessions. Sessions whose membership is unchanged
/// keep their rows (and any built graph); the rest are replaced, which
/// drops their graphs so they show as pending until the next batch.
pub(crate) fn resegment_user(
    conn: &Connection,
    user_id: &str,
    seg: &SegmentationConfig,
) -> Result<Vec<Session>, StoreError> {
    let records = user_records(conn, user_id)?;
    let fresh = segment_sessions(&records, seg)?;

    let existing: Vec<String> = conn
        .prepare("SELECT session_id FROM sessions WHERE user_id = ?1")?
        .query_map([user_id], |r| r.get(0))?
        .collect::<Result<_, _>>()?;
    let mut keep = std::collections::BTreeSet::new();
    for id in &existing {
        let old = load_session(conn, id)?.expect("listed session exists");
        if fresh.contains(&old) {
            keep.insert(id.clone());
        } else {
            conn.execute("DELETE FROM sessions WHERE session_id = ?1", [id])?;
        }
    }
    for s in fresh.iter().filter(|s| !keep.contains(&s.session_id)) {
        conn.execute(
            "INSERT INTO sessions (session_id, user_id, start_ms, end_ms) VALUES (?1, ?2, ?3, ?4)",
            params![s.session_id, s.user_id, s.start.millis(), s.end.millis()],
        )?;
        for (pos, rec) in s.records.iter().enumerate() {
            conn.execute(
                "INSERT INTO session_records (session_id, position, record_id) VALUES (?1, ?2, ?3)",
                params![s.session_id, pos as i64, rec],
            )?;
        }
    }
    Ok(fresh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::parse_log;

    pub(crate) fn line(id: &str, user: &str, query: &str, ts: &str, snippets: &str) -> String {
        format!(
            r#"{{"id":"{id}","user":"{user}","query":"{query}","objective":"text","provider":"bing","ts":"{ts}","snippets":[{snippets}]}}"#
        )
    }

    fn entries(lines: &[String]) -> Vec<LogEntry> {
        parse_log(&lines.join("\n")).unwrap()
    }

    #[test]
    fn ingest_segments_and_lists_newest_first() {
        let mut store = Store::open_in_memory().unwrap();
        let log = entries(&[
            line("q1", "u", "first", "2018-03-01T10:00:00Z", r#"{"rank":1,"title":"t","body":"b","url":"u"}"#),
            line("q2", "u", "second", "2018-03-01T10:10:00Z", ""),
            line("q3", "u", "third", "2018-03-01T12:00:00Z", ""),
        ]);
        let report = store.ingest(&log, &SegmentationConfig::default()).unwrap();
        assert_eq!(report, IngestReport { ingested: 3, unchanged: 0, users: 1 });
        let sums = store.user_session_summaries("u").unwrap();
        assert_eq!(sums.len(), 2);
        assert_eq!(sums[0].first_query, "third");
        assert_eq!(sums[1].first_query, "first");
        assert_eq!(sums[1].last_query, "second");
        assert_eq!(sums[1].query_count, 2);
        assert!(store.integrity_problems().unwrap().is_empty());
    }

    #[test]
    fn reingest_identical_is_noop_and_conflict_detected() {
        let mut store = Store::open_in_memory().unwrap();
        let log = entries(&[line("q1", "u", "first", "2018-03-01T10:00:00Z", "")]);
        store.ingest(&log, &SegmentationConfig::default()).unwrap();
        let again = store.ingest(&log, &SegmentationConfig::default()).unwrap();
        assert_eq!(again.unchanged, 1);
        let changed = entries(&[line("q1", "u", "other", "2018-03-01T10:00:00Z", "")]);
        assert!(matches!(
            store.ingest(&changed, &SegmentationConfig::default()),
            Err(StoreError::Conflict(_))
        ));
    }

    #[test]
    fn bridging_record_merges_sessions() {
        let mut store = Store::open_in_memory().unwrap();
        let seg = SegmentationConfig::default();
        store
            .ingest(
                &entries(&[
                    line("a", "u", "a", "2018-03-01T10:00:00Z", ""),
                    line("c", "u", "c", "2018-03-01T10:50:00Z", ""),
                ]),
                &seg,
            )
            .unwrap();
        assert_eq!(store.user_sessions("u").unwrap().len(), 2);
        store
            .ingest(&entries(&[line("b", "u", "b", "2018-03-01T10:25:00Z", "")]), &seg)
            .unwrap();
        let sessions = store.user_sessions("u").unwrap();
        assert_eq!(sessions.len(), 1);
        assert_eq!(sessions[0].records, vec!["a", "b", "c"]);
        assert!(store.integrity_problems().unwrap().is_empty());
    }

    #[test]
    fn unknown_user_and_session() {
        let store = Store::open_in_memory().unwrap();
        assert!(matches!(store.user_session_summaries("ghost"), Err(StoreError::NotFound { .. })));
        assert!(matches!(store.graph_document("s-x"), Err(StoreError::NotFound { .. })));
    }

    #[test]
    fn writer_lock_excludes_second_writer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.db");
        let a = Store::open(&path).unwrap();
        let mut b = Store::open(&path).unwrap();
        let held = a.try_writer_lock().unwrap();
        assert!(matches!(
            b.ingest(&[], &SegmentationConfig::default()),
            Err(StoreError::Busy)
        ));
        drop(held);
        b.ingest(&[], &SegmentationConfig::default()).unwrap();
    }
}
