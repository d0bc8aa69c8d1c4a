//! Edge scoring and per-session knowledge graph assembly.
//!
//! With `C` the co-occurrence count of a pair and `C_max` the largest count
//! in the session:
//!
//! ```text
//! score = C / C_max                  if C_max <= saturation_threshold
//! score = 1 - lambda / (lambda + C)  otherwise (per-pair mode)
//! ```
//!
//! In literal-max mode the saturating branch uses `C_max` in place of `C`,
//! giving every pair the same score.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::extract::{EntityCandidate, SessionEntities};
use crate::index::{CooccurrenceSource, IndexError};
use crate::tokenize::{tokenize, TOKENIZER_TAG};

pub const DEFAULT_LAMBDA: f64 = 50.0;
pub const DEFAULT_SATURATION_THRESHOLD: u64 = 1000;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("entity `{0}` is not a node of the graph")]
    NotFound(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchMode {
    #[default]
    PerPair,
    LiteralMax,
}

impl FromStr for BranchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per_pair" => Ok(BranchMode::PerPair),
            "literal_max" => Ok(BranchMode::LiteralMax),
            other => Err(format!("unknown branch mode `{other}` (expected per_pair or literal_max)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScoreConfig {
    lambda: f64,
    saturation_threshold: u64,
    branch_mode: BranchMode,
}

impl EdgeScoreConfig {
    pub fn new(lambda: f64, saturation_threshold: u64, branch_mode: BranchMode) -> Result<Self, GraphError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(GraphError::Config(format!("lambda must be positive, got {lambda}")));
        }
        if saturation_threshold < 1 {
            return Err(GraphError::Config("saturation threshold must be at least 1".into()));
        }
        Ok(EdgeScoreConfig {
            lambda,
            saturation_threshold,
            branch_mode,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn saturation_threshold(&self) -> u64 {
        self.saturation_threshold
    }

    pub fn branch_mode(&self) -> BranchMode {
        self.branch_mode
    }
}

impl Default for EdgeScoreConfig {
    fn default() -> Self {
        EdgeScoreConfig {
            lambda: DEFAULT_LAMBDA,
            saturation_threshold: DEFAULT_SATURATION_THRESHOLD,
            branch_mode: BranchMode::PerPair,
        }
    }
}

pub fn edge_score(c: u64, c_max: u64, cfg: &EdgeScoreConfig) -> Result<f64, GraphError> {
    if c_max < 1 {
        return Err(GraphError::Input("c_max must be at least 1".into()));
    }
    if c > c_max {
        return Err(GraphError::Input(format!("count {c} exceeds maximum {c_max}")));
    }
    let score = if c_max > cfg.saturation_threshold {
        let count = match cfg.branch_mode {
            BranchMode::PerPair => c,
            BranchMode::LiteralMax => c_max,
        };
        1.0 - cfg.lambda / (cfg.lambda + count as f64)
    } else {
        c as f64 / c_max as f64
    };
    Ok(score.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    /// `entity_a < entity_b`.
    pub entity_a: String,
    pub entity_b: String,
    pub raw_count: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeGraph {
    pub session_id: String,
    /// Ordered by `q_score` descending, then `entity_id` ascending.
    pub nodes: Vec<EntityCandidate>,
    /// Ordered by `(entity_a, entity_b)`.
    pub edges: Vec<GraphEdge>,
    pub node_snippets: BTreeMap<String, BTreeSet<String>>,
}

fn node_order(a: &EntityCandidate, b: &EntityCandidate) -> std::cmp::Ordering {
    b.q_score
        .total_cmp(&a.q_score)
        .then_with(|| a.entity_id.cmp(&b.entity_id))
}

/// Co-occurrence count of two labels, tolerating labels the tokenizer
/// cannot turn into a phrase.
fn label_count(source: &dyn CooccurrenceSource, a: &str, b: &str) -> Result<u64, IndexError> {
    let (ta, tb) = (tokenize(a), tokenize(b));
    if ta.is_empty() || tb.is_empty() {
        Ok(0)
    } else if ta == tb {
        source.phrase_count(a)
    } else {
        source.pair_count(a, b)
    }
}

pub fn build_session_graph(
    entities: &SessionEntities,
    source: &dyn CooccurrenceSource,
    cfg: &EdgeScoreConfig,
) -> Result<KnowledgeGraph, GraphError> {
    if source.tokenizer_tag() != TOKENIZER_TAG {
        return Err(GraphError::Config(format!(
            "co-occurrence source uses tokenizer `{}`, expected `{TOKENIZER_TAG}`",
            source.tokenizer_tag()
        )));
    }

    let mut best: BTreeMap<&str, &EntityCandidate> = BTreeMap::new();
    for c in entities.ranked.iter().flat_map(|r| &r.entities) {
        match best.get(c.entity_id.as_str()) {
            Some(prev) if prev.q_score >= c.q_score => {}
            _ => {
                best.insert(&c.entity_id, c);
            }
        }
    }
    let mut nodes: Vec<EntityCandidate> = best.into_values().cloned().collect();
    nodes.sort_by(node_order);

    // pairs in canonical (a < b) order
    let mut by_id: Vec<&EntityCandidate> = nodes.iter().collect();
    by_id.sort_by(|a, b| a.entity_id.cmp(&b.entity_id));
    let mut pairs = Vec::new();
    for (i, a) in by_id.iter().enumerate() {
        for b in &by_id[i + 1..] {
            let count = label_count(source, &a.label, &b.label)?;
            pairs.push((a.entity_id.clone(), b.entity_id.clone(), count));
        }
    }

    let c_max = pairs.iter().map(|p| p.2).max().unwrap_or(0);
    let mut edges = Vec::new();
    if c_max > 0 {
        for (entity_a, entity_b, raw_count) in pairs {
            if raw_count == 0 {
                continue;
            }
            let score = edge_score(raw_count, c_max, cfg)?;
            if score > 0.0 {
                edges.push(GraphEdge {
                    entity_a,
                    entity_b,
                    raw_count,
                    score,
                });
            }
        }
    }

    let node_snippets = nodes
        .iter()
        .map(|n| {
            let snippets = entities
                .mention_index
                .get(&n.entity_id)
                .cloned()
                .unwrap_or_default();
            (n.entity_id.clone(), snippets)
        })
        .collect();

    Ok(KnowledgeGraph {
        session_id: entities.session_id.clone(),
        nodes,
        edges,
        node_snippets,
    })
}

impl KnowledgeGraph {
    pub fn has_node(&self, entity_id: &str) -> bool {
        self.nodes.iter().any(|n| n.entity_id == entity_id)
    }

    /// Checks the structural invariants: endpoints are nodes, no self loops,
    /// no duplicate pairs, scores in (0, 1], snippet keys are nodes.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let ids: BTreeSet<&str> = self.nodes.iter().map(|n| n.entity_id.as_str()).collect();
        if ids.len() != self.nodes.len() {
            return Err("duplicate node".into());
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.entity_a >= e.entity_b {
                return Err(format!("edge {}-{} not canonical", e.entity_a, e.entity_b));
            }
            if !ids.contains(e.entity_a.as_str()) || !ids.contains(e.entity_b.as_str()) {
                return Err(format!("edge {}-{} has a dangling endpoint", e.entity_a, e.entity_b));
            }
            if !seen.insert((&e.entity_a, &e.entity_b)) {
                return Err(format!("duplicate edge {}-{}", e.entity_a, e.entity_b));
            }
            if !(e.score > 0.0 && e.score <= 1.0) {
                return Err(format!("edge score {} out of range", e.score));
            }
        }
        if let Some(k) = self.node_snippets.keys().find(|k| !ids.contains(k.as_str())) {
            return Err(format!("snippet index key {k} is not a node"));
        }
        Ok(())
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            session_id: self.session_id.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.entity_id.clone(),
                    label: n.label.clone(),
                    q_score: n.q_score,
                    snippets: self
                        .node_snippets
                        .get(&n.entity_id)
                        .map(|s| s.iter().cloned().collect())
                        .unwrap_or_default(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    a: e.entity_a.clone(),
                    b: e.entity_b.clone(),
                    raw_count: e.raw_count,
                    score: e.score,
                })
                .collect(),
        }
    }
}

/// Canonical serialized form of a knowledge graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub session_id: String,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    pub label: String,
    pub q_score: f64,
    pub snippets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub a: String,
    pub b: String,
    pub raw_count: u64,
    pub score: f64,
}

impl GraphDocument {
    /// Pretty-printed JSON with a trailing newline; byte-stable for equal graphs.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn node(&self, id: &str) -> Option<&NodeDoc> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// The node, its neighbours, and exactly the edges incident to it.
    pub fn subgraph_of(&self, entity_id: &str) -> Result<GraphDocument, GraphError> {
        if self.node(entity_id).is_none() {
            return Err(GraphError::NotFound(entity_id.to_string()));
        }
        let edges: Vec<EdgeDoc> = self
            .edges
            .iter()
            .filter(|e| e.a == entity_id || e.b == entity_id)
            .cloned()
            .collect();
        let keep: BTreeSet<&str> = edges
            .iter()
            .flat_map(|e| [e.a.as_str(), e.b.as_str()])
            .chain([entity_id])
            .collect();
        Ok(GraphDocument {
            session_id: self.session_id.clone(),
            nodes: self.nodes.iter().filter(|n| keep.contains(n.id.as_str())).cloned().collect(),
            edges,
        })
    }
}

/// Subgraph around one node, on the in-memory graph.
pub fn subgraph_of(graph: &KnowledgeGraph, entity_id: &str) -> Result<KnowledgeGraph, GraphError> {
    if !graph.has_node(entity_id) {
        return Err(GraphError::NotFound(entity_id.to_string()));
    }
    let edges: Vec<GraphEdge> = graph
        .edges
        .iter()
        .filter(|e| e.entity_a == entity_id || e.entity_b == entity_id)
        .cloned()
        .collect();
    let keep: BTreeSet<&str> = edges
        .iter()
        .flat_map(|e| [e.entity_a.as_str(), e.entity_b.as_str()])
        .chain([entity_id])
        .collect();
    Ok(KnowledgeGraph {
        session_id: graph.session_id.clone(),
        nodes: graph
            .nodes
            .iter()
            .filter(|n| keep.contains(n.entity_id.as_str()))
            .cloned()
            .collect(),
        node_snippets: graph
            .node_snippets
            .iter()
            .filter(|(k, _)| keep.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
        edges,
    })
}
