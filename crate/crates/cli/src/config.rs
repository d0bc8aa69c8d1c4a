//! Settings resolution. Each value comes from the first of: command-line
//! flag, environment variable, config file, built-in default. Flags and
//! environment are merged by clap before this module sees them.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use histgraph_core::extract::{ExtractionConfig, ScoringScope};
use histgraph_core::graph::{BranchMode, EdgeScoreConfig, DEFAULT_LAMBDA, DEFAULT_SATURATION_THRESHOLD};
use histgraph_core::session::{SegmentationConfig, DEFAULT_GAP_MINUTES};
use serde::Deserialize;

pub const DEFAULT_STORE: &str = "histgraph.db";
pub const DEFAULT_INDEX: &str = "histgraph.idx";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

/// Keys accepted in the config file, e.g.
///
/// ```toml
/// store = "data/histgraph.db"
/// session_gap_minutes = 20
/// branch_mode = "literal_max"
/// ```
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub session_gap_minutes: Option<u64>,
    pub lambda: Option<f64>,
    pub saturation_threshold: Option<u64>,
    pub branch_mode: Option<String>,
    pub scoring_scope: Option<String>,
    pub bind: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {}", path.display(), e.message()))
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn or(self, lower: FileConfig) -> FileConfig {
        FileConfig {
            store: self.store.or(lower.store),
            index: self.index.or(lower.index),
            corpus: self.corpus.or(lower.corpus),
            dictionary: self.dictionary.or(lower.dictionary),
            session_gap_minutes: self.session_gap_minutes.or(lower.session_gap_minutes),
            lambda: self.lambda.or(lower.lambda),
            saturation_threshold: self.saturation_threshold.or(lower.saturation_threshold),
            branch_mode: self.branch_mode.or(lower.branch_mode),
            scoring_scope: self.scoring_scope.or(lower.scoring_scope),
            bind: self.bind.or(lower.bind),
        }
    }
}

/// Validated settings for one invocation.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub store: PathBuf,
    pub index: PathBuf,
    pub corpus: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub segmentation: SegmentationConfig,
    pub extraction: ExtractionConfig,
    pub edges: EdgeScoreConfig,
    pub bind: SocketAddr,
}

impl CliConfig {
    pub fn resolve(v: FileConfig) -> Result<Self, String> {
        let segmentation = SegmentationConfig::from_minutes(v.session_gap_minutes.unwrap_or(DEFAULT_GAP_MINUTES))
            .map_err(|e| format!("session_gap_minutes: {e}"))?;
        let branch_mode = match v.branch_mode.as_deref() {
            Some(s) => s.parse::<BranchMode>()?,
            None => BranchMode::default(),
        };
        let edges = EdgeScoreConfig::new(
            v.lambda.unwrap_or(DEFAULT_LAMBDA),
            v.saturation_threshold.unwrap_or(DEFAULT_SATURATION_THRESHOLD),
            branch_mode,
        )
        .map_err(|e| e.to_string())?;
        let scope = match v.scoring_scope.as_deref() {
            Some(s) => s.parse::<ScoringScope>()?,
            None => ScoringScope::default(),
        };
        let bind_text = v.bind.unwrap_or_else(|| DEFAULT_BIND.to_string());
        let bind = bind_text
            .parse()
            .map_err(|_| format!("invalid bind address `{bind_text}` (expected HOST:PORT)"))?;
        Ok(CliConfig {
            store: v.store.unwrap_or_else(|| DEFAULT_STORE.into()),
            index: v.index.unwrap_or_else(|| DEFAULT_INDEX.into()),
            corpus: v.corpus,
            dictionary: v.dictionary,
            segmentation,
            extraction: ExtractionConfig { scope, ..Default::default() },
            edges,
            bind,
        })
    }
}
