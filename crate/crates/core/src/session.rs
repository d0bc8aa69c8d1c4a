//! Time-gap session segmentation.

use serde::{Deserialize, Serialize};

use crate::log::{QueryRecord, Timestamp};

pub const DEFAULT_GAP_MINUTES: u64 = 30;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SessionError {
    #[error("records belong to more than one user ({0} and {1})")]
    MixedUsers(String, String),
    #[error("session gap threshold must be positive")]
    ZeroGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentationConfig {
    gap_threshold_ms: i64,
}

impl SegmentationConfig {
    pub fn from_millis(ms: i64) -> Result<Self, SessionError> {
        if ms <= 0 {
            return Err(SessionError::ZeroGap);
        }
        Ok(SegmentationConfig {
            gap_threshold_ms: ms,
        })
    }

    pub fn from_minutes(minutes: u64) -> Result<Self, SessionError> {
        let ms = i64::try_from(minutes)
            .ok()
            .and_then(|m| m.checked_mul(60_000))
            .unwrap_or(i64::MAX);
        Self::from_millis(ms)
    }

    pub fn gap_threshold_ms(&self) -> i64 {
        self.gap_threshold_ms
    }
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self::from_minutes(DEFAULT_GAP_MINUTES).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub user_id: String,
    /// Record ids in ascending timestamp order.
    pub records: Vec<String>,
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Session {
    /// Session ids are keyed on the first record, so appending later
    /// queries keeps an existing session's id stable.
    pub fn make_id(first_record_id: &str) -> String {
        format!("s-{first_record_id}")
    }
}

/// Splits one user's records into sessions. A record opens a new session
/// when its gap to the previous record is strictly greater than the
/// threshold. Sessions come back most recent first.
pub fn segment_sessions(
    records: &[QueryRecord],
    cfg: &SegmentationConfig,
) -> Result<Vec<Session>, SessionError> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    if let Some(other) = records.iter().find(|r| r.user_id != first.user_id) {
        return Err(SessionError::MixedUsers(
            first.user_id.clone(),
            other.user_id.clone(),
        ));
    }

    let mut sorted: Vec<&QueryRecord> = records.iter().collect();
    // stable: equal timestamps keep input order
    sorted.sort_by_key(|r| r.timestamp);

    let mut groups: Vec<Vec<&QueryRecord>> = Vec::new();
    for r in sorted {
        match groups.last_mut() {
            Some(g)
                if r.timestamp.millis() - g.last().unwrap().timestamp.millis()
                    <= cfg.gap_threshold_ms =>
            {
                g.push(r)
            }
            _ => groups.push(vec![r]),
        }
    }

    Ok(groups
        .into_iter()
        .rev()
        .map(|g| Session {
            session_id: Session::make_id(&g[0].record_id),
            user_id: first.user_id.clone(),
            start: g[0].timestamp,
            end: g[g.len() - 1].timestamp,
            records: g.into_iter().map(|r| r.record_id.clone()).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::Objective;
    use proptest::prelude::*;

    const MIN: i64 = 60_000;

    fn rec(id: &str, user: &str, ms: i64) -> QueryRecord {
        QueryRecord {
            record_id: id.into(),
            user_id: user.into(),
            query_text: id.into(),
            objective: Objective::Text,
            provider: "bing".into(),
            timestamp: Timestamp::from_millis(ms).unwrap(),
        }
    }

    /// Brute force: a cut sits between sorted neighbours whose gap exceeds the threshold.
    fn oracle(ts: &[i64], gap: i64) -> Vec<Vec<i64>> {
        let mut sorted = ts.to_vec();
        sorted.sort();
        let mut cuts = vec![0];
        for i in 1..sorted.len() {
            if sorted[i] - sorted[i - 1] > gap {
                cuts.push(i);
            }
        }
        cuts.push(sorted.len());
        let mut out: Vec<Vec<i64>> = cuts
            .windows(2)
            .filter(|w| w[0] < w[1])
            .map(|w| sorted[w[0]..w[1]].to_vec())
            .collect();
        out.reverse();
        out
    }

    #[test]
    fn empty_input() {
        assert!(segment_sessions(&[], &SegmentationConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn splits_on_large_gap_newest_first() {
        let t0 = 1_520_000_000_000;
        let recs = [rec("q1", "u", t0), rec("q2", "u", t0 + 10 * MIN), rec("q3", "u", t0 + 50 * MIN)];
        let s = segment_sessions(&recs, &SegmentationConfig::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].records, vec!["q3"]);
        assert_eq!(s[1].records, vec!["q1", "q2"]);
        assert_eq!(s[1].start.millis(), t0);
        assert_eq!(s[1].end.millis(), t0 + 10 * MIN);
        assert_eq!(s[1].session_id, "s-q1");
    }

    #[test]
    fn gap_equal_to_threshold_stays_merged() {
        let recs = [rec("a", "u", 0), rec("b", "u", 30 * MIN)];
        let s = segment_sessions(&recs, &SegmentationConfig::default()).unwrap();
        assert_eq!(s.len(), 1);
        let recs = [rec("a", "u", 0), rec("b", "u", 30 * MIN + 1)];
        assert_eq!(segment_sessions(&recs, &SegmentationConfig::default()).unwrap().len(), 2);
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let recs = [rec("late", "u", 5 * MIN), rec("early", "u", 0)];
        let s = segment_sessions(&recs, &SegmentationConfig::default()).unwrap();
        assert_eq!(s[0].records, vec!["early", "late"]);
    }

    #[test]
    fn mixed_users_rejected() {
        let recs = [rec("a", "u", 0), rec("b", "v", 1)];
        assert!(matches!(
            segment_sessions(&recs, &SegmentationConfig::default()),
            Err(SessionError::MixedUsers(..))
        ));
    }

    #[test]
    fn zero_gap_rejected() {
        assert_eq!(SegmentationConfig::from_minutes(0), Err(SessionError::ZeroGap));
    }

    proptest! {
        #[test]
        fn matches_gap_oracle(ts in proptest::collection::vec(0i64..500, 0..40), gap in 1i64..100) {
            let recs: Vec<_> = ts.iter().enumerate().map(|(i, &t)| rec(&format!("r{i}"), "u", t * MIN)).collect();
            let cfg = SegmentationConfig::from_millis(gap * MIN).unwrap();
            let got: Vec<Vec<i64>> = segment_sessions(&recs, &cfg).unwrap().iter().map(|s| {
                s.records.iter().map(|id| recs.iter().find(|r| &r.record_id == id).unwrap().timestamp.millis() / MIN).collect()
            }).collect();
            prop_assert_eq!(got, oracle(&ts, gap));
        }
    }
}
