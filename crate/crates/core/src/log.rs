//! Search-history event model and the line-delimited ingestion format.
//!
//! One log line is a JSON object:
//!
//! ```text
//! {"id":"q1","user":"u1","query":"Brian May","objective":"text","provider":"bing",
//!  "ts":"2018-03-01T10:00:00Z","snippets":[{"rank":1,"title":"..","body":"..","url":"..","interaction":"clicked"}]}
//! ```
//!
//! `snippets` is optional. Fields not listed above are ignored.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const MAX_RANK: u8 = 10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LogError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: invalid or missing field `{field}`")]
    Schema { line: usize, field: String },
    #[error("snippet rank {rank} outside 1..={MAX_RANK}")]
    Range { rank: i64 },
    #[error("duplicate snippet (record {record_id}, rank {rank})")]
    Duplicate { record_id: String, rank: u8 },
}

impl LogError {
    /// Name of the offending field, for schema errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            LogError::Schema { field, .. } => Some(field),
            _ => None,
        }
    }

    fn at_line(self, n: usize) -> Self {
        match self {
            LogError::Parse {
                column, message, ..
            } => LogError::Parse {
                line: n,
                column,
                message,
            },
            LogError::Schema { field, .. } => LogError::Schema { line: n, field },
            other => other,
        }
    }
}

/// UTC instant truncated to millisecond precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_millis(ms: i64) -> Option<Self> {
        Utc.timestamp_millis_opt(ms).single().map(|_| Timestamp(ms))
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_millis_opt(self.0).unwrap()
    }

    pub fn to_rfc3339(self) -> String {
        self.to_datetime()
            .to_rfc3339_opts(SecondsFormat::Millis, true)
    }
}

impl From<DateTime<Utc>> for Timestamp {
    fn from(dt: DateTime<Utc>) -> Self {
        Timestamp(dt.timestamp_millis())
    }
}

impl FromStr for Timestamp {
    type Err = chrono::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dt = DateTime::parse_from_rfc3339(s)?;
        Ok(Timestamp(dt.with_timezone(&Utc).timestamp_millis()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Text,
    Image,
    Video,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Text => "text",
            Objective::Image => "image",
            Objective::Video => "video",
        }
    }
}

impl FromStr for Objective {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "text" => Ok(Objective::Text),
            "image" => Ok(Objective::Image),
            "video" => Ok(Objective::Video),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Clicked,
    Saved,
    #[default]
    None,
}

impl Interaction {
    pub fn as_str(self) -> &'static str {
        match self {
            Interaction::Clicked => "clicked",
            Interaction::Saved => "saved",
            Interaction::None => "none",
        }
    }
}

impl FromStr for Interaction {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "clicked" => Ok(Interaction::Clicked),
            "saved" => Ok(Interaction::Saved),
            "none" => Ok(Interaction::None),
            _ => Err(()),
        }
    }
}

/// One logged search event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub record_id: String,
    pub user_id: String,
    pub query_text: String,
    pub objective: Objective,
    pub provider: String,
    pub timestamp: Timestamp,
}

/// One top-10 search result of a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub snippet_id: String,
    pub record_id: String,
    pub rank: u8,
    pub title: String,
    pub body: String,
    pub url: String,
    pub interaction: Interaction,
}

impl Snippet {
    /// Snippet ids are derived from the owning record and the rank.
    pub fn make_id(record_id: &str, rank: u8) -> String {
        format!("{record_id}#{rank}")
    }

    /// Text the linker scans: title followed by body.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

/// A record together with its fetched results, as carried by one log line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub record: QueryRecord,
    pub snippets: Vec<Snippet>,
}

/// Checks a single snippet's own invariants.
pub fn validate_snippet(s: Snippet) -> Result<Snippet, LogError> {
    if !(1..=MAX_RANK).contains(&s.rank) {
        return Err(LogError::Range {
            rank: i64::from(s.rank),
        });
    }
    Ok(s)
}

/// Validates a batch, additionally rejecting duplicate `(record_id, rank)` pairs.
pub fn validate_snippets(batch: Vec<Snippet>) -> Result<Vec<Snippet>, LogError> {
    let mut seen = HashSet::new();
    batch
        .into_iter()
        .map(|s| {
            let s = validate_snippet(s)?;
            if !seen.insert((s.record_id.clone(), s.rank)) {
                return Err(LogError::Duplicate {
                    record_id: s.record_id,
                    rank: s.rank,
                });
            }
            Ok(s)
        })
        .collect()
}

fn schema(field: &str) -> LogError {
    LogError::Schema {
        line: 1,
        field: field.to_string(),
    }
}

fn required_str<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a str, LogError> {
    obj.get(field)
        .and_then(Value::as_str)
        .ok_or_else(|| schema(field))
}

fn optional_str<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a str, LogError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(""),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(schema(field)),
    }
}

fn parse_snippet(record_id: &str, v: &Value) -> Result<Snippet, LogError> {
    let obj = v.as_object().ok_or_else(|| schema("snippets"))?;
    let rank = obj
        .get("rank")
        .and_then(Value::as_i64)
        .ok_or_else(|| schema("snippets.rank"))?;
    let rank = u8::try_from(rank)
        .ok()
        .filter(|r| (1..=MAX_RANK).contains(r))
        .ok_or(LogError::Range { rank })?;
    let interaction = match obj.get("interaction") {
        None | Some(Value::Null) => Interaction::None,
        Some(Value::String(s)) => s
            .parse()
            .map_err(|_| schema("snippets.interaction"))?,
        Some(_) => return Err(schema("snippets.interaction")),
    };
    Ok(Snippet {
        snippet_id: Snippet::make_id(record_id, rank),
        record_id: record_id.to_string(),
        rank,
        title: optional_str(obj, "title")?.to_string(),
        body: optional_str(obj, "body")?.to_string(),
        url: optional_str(obj, "url")?.to_string(),
        interaction,
    })
}

/// Parses one ingestion line. Error line numbers are 1 for a single line;
/// [`parse_log`] rewrites them to the position within the file.
pub fn parse_log_line(line: &str) -> Result<LogEntry, LogError> {
    let value: Value = serde_json::from_str(line).map_err(|e| LogError::Parse {
        line: 1,
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| LogError::Parse {
        line: 1,
        column: 1,
        message: "expected a JSON object".into(),
    })?;

    let record_id = required_str(obj, "id")?;
    if record_id.is_empty() {
        return Err(schema("id"));
    }
    let user_id = required_str(obj, "user")?;
    if user_id.is_empty() {
        return Err(schema("user"));
    }
    let query = required_str(obj, "query")?;
    if query.trim().is_empty() {
        return Err(schema("query"));
    }
    let objective: Objective = required_str(obj, "objective")?
        .parse()
        .map_err(|_| schema("objective"))?;
    let provider = required_str(obj, "provider")?;
    let timestamp: Timestamp = required_str(obj, "ts")?
        .parse()
        .map_err(|_| schema("ts"))?;

    let snippets = match obj.get("snippets") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| parse_snippet(record_id, v))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema("snippets")),
    };
    let snippets = validate_snippets(snippets)?;

    Ok(LogEntry {
        record: QueryRecord {
            record_id: record_id.to_string(),
            user_id: user_id.to_string(),
            query_text: query.to_string(),
            objective,
            provider: provider.to_string(),
            timestamp,
        },
        snippets,
    })
}

/// Parses a whole log, skipping blank lines. Order is preserved.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, LogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_log_line(l).map_err(|e| e.at_line(i + 1)))
        .collect()
}

#[derive(Serialize)]
struct SnippetLine<'a> {
    rank: u8,
    title: &'a str,
    body: &'a str,
    url: &'a str,
    interaction: Interaction,
}

#[derive(Serialize)]
struct EntryLine<'a> {
    id: &'a str,
    user: &'a str,
    query: &'a str,
    objective: Objective,
    provider: &'a str,
    ts: Timestamp,
    snippets: Vec<SnippetLine<'a>>,
}

/// Serializes an entry back into a single ingestion line (no trailing newline).
pub fn to_log_line(entry: &LogEntry) -> String {
    let r = &entry.record;
    let line = EntryLine {
        id: &r.record_id,
        user: &r.user_id,
        query: &r.query_text,
        objective: r.objective,
        provider: &r.provider,
        ts: r.timestamp,
        snippets: entry
            .snippets
            .iter()
            .map(|s| SnippetLine {
                rank: s.rank,
                title: &s.title,
                body: &s.body,
                url: &s.url,
                interaction: s.interaction,
            })
            .collect(),
    };
    serde_json::to_string(&line).expect("log line serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BRIAN: &str = r#"{"id":"q1","user":"ana","query":"Brian May","objective":"text","provider":"bing","ts":"2018-03-01T10:00:00Z"}"#;

    #[test]
    fn parses_direct_fields() {
        let e = parse_log_line(BRIAN).unwrap();
        assert_eq!(e.record.query_text, "Brian May");
        assert_eq!(e.record.objective, Objective::Text);
        assert_eq!(e.record.provider, "bing");
        assert_eq!(e.record.user_id, "ana");
        assert_eq!(e.record.timestamp.to_rfc3339(), "2018-03-01T10:00:00.000Z");
        assert!(e.snippets.is_empty());
    }

    #[test]
    fn missing_timestamp_names_field() {
        let line = r#"{"id":"q1","user":"u","query":"x","objective":"text","provider":"bing"}"#;
        let err = parse_log_line(line).unwrap_err();
        assert_eq!(err.field(), Some("ts"));
    }

    #[test]
    fn unknown_objective_is_schema_error() {
        let line = BRIAN.replace("\"text\"", "\"audio\"");
        assert_eq!(parse_log_line(&line).unwrap_err().field(), Some("objective"));
    }

    #[test]
    fn blank_query_rejected() {
        let line = BRIAN.replace("Brian May", "   ");
        assert_eq!(parse_log_line(&line).unwrap_err().field(), Some("query"));
    }

    #[test]
    fn malformed_reports_offset() {
        let err = parse_log_line(r#"{"id": "q1", "user"#).unwrap_err();
        assert!(matches!(err, LogError::Parse { line: 1, column, .. } if column > 0));

        let text = format!("{BRIAN}\n\n{{oops\n");
        match parse_log(&text).unwrap_err() {
            LogError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extra_fields_ignored() {
        let line = BRIAN.replace("\"id\"", "\"session_hint\":42,\"id\"");
        assert_eq!(parse_log_line(&line).unwrap().record.record_id, "q1");
    }

    #[test]
    fn timestamps_normalized_to_utc() {
        let line = BRIAN.replace("2018-03-01T10:00:00Z", "2018-03-01T11:00:00.250+01:00");
        let e = parse_log_line(&line).unwrap();
        assert_eq!(e.record.timestamp.to_rfc3339(), "2018-03-01T10:00:00.250Z");
    }

    fn snip(record: &str, rank: u8) -> Snippet {
        Snippet {
            snippet_id: Snippet::make_id(record, rank),
            record_id: record.into(),
            rank,
            title: String::new(),
            body: String::new(),
            url: String::new(),
            interaction: Interaction::None,
        }
    }

    #[test]
    fn snippet_rank_bounds() {
        assert!(validate_snippet(snip("r1", 1)).is_ok());
        assert!(validate_snippet(snip("r1", 10)).is_ok());
        assert_eq!(
            validate_snippet(snip("r1", 11)).unwrap_err(),
            LogError::Range { rank: 11 }
        );
        assert!(validate_snippet(snip("r1", 0)).is_err());
    }

    #[test]
    fn duplicate_rank_in_batch() {
        let err = validate_snippets(vec![snip("r1", 3), snip("r2", 3), snip("r1", 3)]).unwrap_err();
        assert_eq!(
            err,
            LogError::Duplicate {
                record_id: "r1".into(),
                rank: 3
            }
        );
    }

    #[test]
    fn line_level_snippet_checks() {
        let line = BRIAN.replace(
            "}",
            r#","snippets":[{"rank":11,"title":"t","body":"b","url":"u"}]}"#,
        );
        assert_eq!(parse_log_line(&line).unwrap_err(), LogError::Range { rank: 11 });
        let line = BRIAN.replace(
            "}",
            r#","snippets":[{"rank":2,"title":"t"},{"rank":2,"title":"t"}]}"#,
        );
        assert!(matches!(parse_log_line(&line), Err(LogError::Duplicate { .. })));
    }

    #[test]
    fn thousand_lines_in_order() {
        let text: String = (0..1000)
            .map(|i| {
                format!(
                    "{{\"id\":\"r{i}\",\"user\":\"u{}\",\"query\":\"query {i}\",\"objective\":\"image\",\"provider\":\"flickr\",\"ts\":\"2018-01-01T00:00:00Z\"}}\n",
                    i % 7
                )
            })
            .collect();
        let entries = parse_log(&text).unwrap();
        assert_eq!(entries.len(), 1000);
        for (i, e) in entries.iter().enumerate() {
            assert_eq!(e.record.record_id, format!("r{i}"));
        }
    }

    fn arb_entry() -> impl Strategy<Value = LogEntry> {
        let objective = prop_oneof![
            Just(Objective::Text),
            Just(Objective::Image),
            Just(Objective::Video)
        ];
        let interaction = prop_oneof![
            Just(Interaction::Clicked),
            Just(Interaction::Saved),
            Just(Interaction::None)
        ];
        (
            "[a-z0-9]{1,8}",
            "[a-z]{1,6}",
            "[^\\x00-\\x1f]{0,20}[a-zA-Z][^\\x00-\\x1f]{0,20}",
            objective,
            "[a-z]{0,8}",
            -2_000_000_000_000i64..4_000_000_000_000i64,
            proptest::collection::btree_map(
                1u8..=10,
                (".{0,20}", ".{0,40}", "[a-z:/.]{0,20}", interaction),
                0..5,
            ),
        )
            .prop_map(|(id, user, query, objective, provider, ms, snippets)| LogEntry {
                snippets: snippets
                    .into_iter()
                    .map(|(rank, (title, body, url, interaction))| Snippet {
                        snippet_id: Snippet::make_id(&id, rank),
                        record_id: id.clone(),
                        rank,
                        title,
                        body,
                        url,
                        interaction,
                    })
                    .collect(),
                record: QueryRecord {
                    record_id: id,
                    user_id: user,
                    query_text: query,
                    objective,
                    provider,
                    timestamp: Timestamp::from_millis(ms).unwrap(),
                },
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_roundtrip(entry in arb_entry()) {
            let line = to_log_line(&entry);
            prop_assert!(!line.contains('\n'));
            let parsed = parse_log_line(&line).unwrap();
            prop_assert_eq!(&parsed, &entry);
            prop_assert_eq!(to_log_line(&parsed), line);
        }
    }
}
