//! Entity candidate scoring and top-k selection.
//!
//! For an entity `e` mentioned `n` times in a query's top-10 snippets with
//! linker scores `s_1..s_n` (all negative):
//!
//! ```text
//! avg_fel(e) = (s_1 + .. + s_n) / n
//! q_score(e) = freq(e) / |avg_fel(e)|
//! ```
//!
//! Candidates whose label is shorter than four characters are dropped, the
//! rest are ranked by `q_score` and the top five kept.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linker::{EntityLinker, EntityMention};
use crate::log::Snippet;
use crate::session::Session;

/// `|avg_fel|` at or below this is treated as a degenerate linker score.
pub const DEGENERATE_EPSILON: f64 = 1e-9;
pub const DEFAULT_TOP_K: usize = 5;
pub const MIN_LABEL_CHARS: usize = 4;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExtractError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate linker score {avg_fel} for entity {}", entity_id.as_deref().unwrap_or("?"))]
    DegenerateScore {
        entity_id: Option<String>,
        avg_fel: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityCandidate {
    pub entity_id: String,
    pub label: String,
    /// Occurrences across the top-10 snippets.
    pub freq: u32,
    /// Number of scores averaged into `avg_fel`. Equal to `freq` today.
    pub n: u32,
    pub avg_fel: f64,
    pub q_score: f64,
}

/// Whether entities are ranked within each query or across the whole session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringScope {
    #[default]
    Query,
    Session,
}

impl FromStr for ScoringScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "query" => Ok(ScoringScope::Query),
            "session" => Ok(ScoringScope::Session),
            other => Err(format!("unknown scoring scope `{other}` (expected query or session)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionConfig {
    pub top_k: usize,
    pub scope: ScoringScope,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            top_k: DEFAULT_TOP_K,
            scope: ScoringScope::Query,
        }
    }
}

/// Mean linker score over one entity's mentions.
pub fn avg_fel(mentions: &[EntityMention]) -> Result<f64, ExtractError> {
    let Some(first) = mentions.first() else {
        return Err(ExtractError::Input("no mentions to average".into()));
    };
    if mentions.iter().any(|m| m.entity_id != first.entity_id) {
        return Err(ExtractError::Input("mentions of different entities".into()));
    }
    if mentions.iter().any(|m| m.fel_score.is_nan() || m.fel_score >= 0.0) {
        return Err(ExtractError::Input("linker scores must be negative".into()));
    }
    let sum: f64 = mentions.iter().map(|m| m.fel_score).sum();
    Ok(sum / mentions.len() as f64)
}

pub fn q_score(freq: u32, avg_fel: f64) -> Result<f64, ExtractError> {
    if freq == 0 {
        return Err(ExtractError::Input("freq must be at least 1".into()));
    }
    if avg_fel.is_nan() || avg_fel >= -DEGENERATE_EPSILON {
        return Err(ExtractError::DegenerateScore {
            entity_id: None,
            avg_fel,
        });
    }
    Ok(f64::from(freq) / avg_fel.abs())
}

/// Groups mentions by entity and scores each group.
pub fn score_mentions(
    mentions: &[EntityMention],
    linker: &dyn EntityLinker,
) -> Result<Vec<EntityCandidate>, ExtractError> {
    let mut by_entity: BTreeMap<&str, Vec<EntityMention>> = BTreeMap::new();
    for m in mentions {
        by_entity.entry(&m.entity_id).or_default().push(m.clone());
    }
    by_entity
        .into_iter()
        .map(|(id, group)| {
            let n = group.len() as u32;
            let avg = avg_fel(&group)?;
            let q = q_score(n, avg).map_err(|e| match e {
                ExtractError::DegenerateScore { avg_fel, .. } => ExtractError::DegenerateScore {
                    entity_id: Some(id.to_string()),
                    avg_fel,
                },
                other => other,
            })?;
            let label = linker
                .label(id)
                .map(str::to_string)
                .unwrap_or_else(|| group[0].surface.clone());
            Ok(EntityCandidate {
                entity_id: id.to_string(),
                label,
                freq: n,
                n,
                avg_fel: avg,
                q_score: q,
            })
        })
        .collect()
}

/// Drops short labels, orders by `q_score` descending then `entity_id`
/// ascending, and keeps the first `k`.
pub fn select_top_entities(candidates: &[EntityCandidate], k: usize) -> Vec<EntityCandidate> {
    let mut kept: Vec<EntityCandidate> = candidates
        .iter()
        .filter(|c| c.label.chars().count() >= MIN_LABEL_CHARS)
        .cloned()
        .collect();
    kept.sort_by(|a, b| {
        b.q_score
            .total_cmp(&a.q_score)
            .then_with(|| a.entity_id.cmp(&b.entity_id))
    });
    kept.truncate(k);
    kept
}

/// Top entities for one query (or for the whole session under
/// [`ScoringScope::Session`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntities {
    /// Record id, or the session id when scoring per session.
    pub key: String,
    pub entities: Vec<EntityCandidate>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionEntities {
    pub session_id: String,
    pub ranked: Vec<RankedEntities>,
    /// Every linked entity, mapped to the snippets that mention it.
    pub mention_index: BTreeMap<String, BTreeSet<String>>,
}

/// Links and ranks entities for every query of a session. `snippets` may
/// contain results of other records; only the session's own are used.
pub fn extract_session_entities(
    session: &Session,
    snippets: &[Snippet],
    linker: &dyn EntityLinker,
    cfg: &ExtractionConfig,
) -> Result<SessionEntities, ExtractError> {
    let mut per_record: Vec<(String, Vec<EntityMention>)> = Vec::new();
    let mut mention_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

    for record_id in &session.records {
        let mut own: Vec<&Snippet> = snippets.iter().filter(|s| &s.record_id == record_id).collect();
        own.sort_by_key(|s| s.rank);
        let mut mentions = Vec::new();
        for s in own {
            for m in linker.link(&s.snippet_id, &s.text()) {
                mention_index
                    .entry(m.entity_id.clone())
                    .or_default()
                    .insert(m.snippet_id.clone());
                mentions.push(m);
            }
        }
        per_record.push((record_id.clone(), mentions));
    }

    let groups = match cfg.scope {
        ScoringScope::Query => per_record,
        ScoringScope::Session => vec![(
            session.session_id.clone(),
            per_record.into_iter().flat_map(|(_, m)| m).collect(),
        )],
    };

    let ranked = groups
        .into_iter()
        .map(|(key, mentions)| {
            let scored = score_mentions(&mentions, linker)?;
            Ok(RankedEntities {
                key,
                entities: select_top_entities(&scored, cfg.top_k),
            })
        })
        .collect::<Result<Vec<_>, ExtractError>>()?;

    Ok(SessionEntities {
        session_id: session.session_id.clone(),
        ranked,
        mention_index,
    })
}
