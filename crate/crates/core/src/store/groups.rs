//! Collaborative groups. A session belongs to a group when any of its
//! snippets has been tagged as useful to that group.

use std::collections::BTreeSet;

use rusqlite::{params, OptionalExtension};
use serde::{Deserialize, Serialize};

use super::{load_session, not_found, ts_col, Store, StoreError};
use crate::log::Timestamp;
use crate::session::Session;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub group_id: String,
    pub name: String,
    pub members: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultTag {
    pub snippet_id: String,
    pub group_id: String,
    pub tagged_by: String,
    pub timestamp: Timestamp,
}

impl Store {
    /// Creates a group, registering any member not yet known as a user.
    pub fn create_group(&mut self, group_id: &str, name: &str, members: &[&str]) -> Result<Group, StoreError> {
        if group_id.is_empty() {
            return Err(StoreError::Input("empty group id".into()));
        }
        if name.trim().is_empty() {
            return Err(StoreError::Input("group name must not be empty".into()));
        }
        if members.is_empty() || members.iter().any(|m| m.is_empty()) {
            return Err(StoreError::Input("a group needs at least one named member".into()));
        }
        let tx = self.conn.transaction()?;
        let exists = tx
            .query_row("SELECT 1 FROM groups WHERE group_id = ?1", [group_id], |_| Ok(()))
            .optional()?;
        if exists.is_some() {
            return Err(StoreError::Conflict(format!("group `{group_id}` already exists")));
        }
        tx.execute("INSERT INTO groups (group_id, name) VALUES (?1, ?2)", [group_id, name])?;
        for m in members {
            tx.execute("INSERT OR IGNORE INTO users (user_id) VALUES (?1)", [m])?;
            tx.execute(
                "INSERT OR IGNORE INTO group_members (group_id, user_id) VALUES (?1, ?2)",
                [group_id, m],
            )?;
        }
        tx.commit()?;
        Ok(self.group(group_id)?.expect("group just created"))
    }

    pub fn group(&self, group_id: &str) -> Result<Option<Group>, StoreError> {
        let name: Option<String> = self
            .conn
            .query_row("SELECT name FROM groups WHERE group_id = ?1", [group_id], |r| r.get(0))
            .optional()?;
        let Some(name) = name else { return Ok(None) };
        let members = self
            .conn
            .prepare("SELECT user_id FROM group_members WHERE group_id = ?1 ORDER BY user_id")?
            .query_map([group_id], |r| r.get(0))?
            .collect::<Result<_, _>>()?;
        Ok(Some(Group {
            group_id: group_id.to_string(),
            name,
            members,
        }))
    }

    fn existing_tag(&self, snippet_id: &str, group_id: &str) -> Result<Option<ResultTag>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT tagged_by, ts_ms FROM result_tags WHERE snippet_id = ?1 AND group_id = ?2",
                [snippet_id, group_id],
                |r| {
                    Ok(ResultTag {
                        snippet_id: snippet_id.to_string(),
                        group_id: group_id.to_string(),
                        tagged_by: r.get(0)?,
                        timestamp: ts_col(r, 1)?,
                    })
                },
            )
            .optional()?)
    }

    /// Tags a snippet as useful to a group. Tagging an already-tagged
    /// snippet returns the original tag.
    pub fn tag_result(
        &self,
        snippet_id: &str,
        group_id: &str,
        user_id: &str,
        at: Timestamp,
    ) -> Result<ResultTag, StoreError> {
        let group = self.group(group_id)?.ok_or_else(|| not_found("group", group_id))?;
        let snippet = self
            .conn
            .query_row("SELECT 1 FROM snippets WHERE snippet_id = ?1", [snippet_id], |_| Ok(()))
            .optional()?;
        if snippet.is_none() {
            return Err(not_found("snippet", snippet_id));
        }
        if !self.user_exists(user_id)? {
            return Err(not_found("user", user_id));
        }
        if !group.members.contains(user_id) {
            return Err(StoreError::Permission {
                user_id: user_id.to_string(),
                group_id: group_id.to_string(),
            });
        }
        if let Some(tag) = self.existing_tag(snippet_id, group_id)? {
            return Ok(tag);
        }
        self.conn.execute(
            "INSERT INTO result_tags (snippet_id, group_id, tagged_by, ts_ms) VALUES (?1, ?2, ?3, ?4)",
            params![snippet_id, group_id, user_id, at.millis()],
        )?;
        Ok(ResultTag {
            snippet_id: snippet_id.to_string(),
            group_id: group_id.to_string(),
            tagged_by: user_id.to_string(),
            timestamp: at,
        })
    }

    pub fn group_tags(&self, group_id: &str) -> Result<Vec<ResultTag>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT snippet_id, tagged_by, ts_ms FROM result_tags WHERE group_id = ?1 ORDER BY snippet_id",
        )?;
        let rows = stmt.query_map([group_id], |r| {
            Ok(ResultTag {
                snippet_id: r.get(0)?,
                group_id: group_id.to_string(),
                tagged_by: r.get(1)?,
                timestamp: ts_col(r, 2)?,
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// Sessions with at least one snippet tagged to the group, most recent first.
    pub fn group_sessions(&self, group_id: &str) -> Result<Vec<(String, Session)>, StoreError> {
        if self.group(group_id)?.is_none() {
            return Err(not_found("group", group_id));
        }
        let ids: Vec<String> = self
            .conn
            .prepare(
                "SELECT DISTINCT s.session_id, s.end_ms
                 FROM sessions s
                 JOIN session_records sr ON sr.session_id = s.session_id
                 JOIN snippets sn ON sn.record_id = sr.record_id
                 JOIN result_tags t ON t.snippet_id = sn.snippet_id
                 WHERE t.group_id = ?1
                 ORDER BY s.end_ms DESC, s.session_id DESC",
            )?
            .query_map([group_id], |r| r.get(0))?
            .collect::<Result<_, _>>()?;
        ids.iter()
            .map(|id| {
                let s = load_session(&self.conn, id)?.expect("joined session exists");
                Ok((s.user_id.clone(), s))
            })
            .collect()
    }
}
