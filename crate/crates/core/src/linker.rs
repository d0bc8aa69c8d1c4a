//! Dictionary-backed entity linker.
//!
//! Dictionary file: UTF-8, one alias per line,
//! `alias<TAB>entity_id<TAB>label<TAB>base_score`. Blank lines and lines
//! starting with `#` are skipped. Aliases are case-folded through the shared
//! tokenizer, so `New-York` and `new york` are the same alias.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::tokenize::{tokenize, tokenize_spans};

#[derive(Debug, thiserror::Error)]
pub enum DictionaryError {
    #[error("dictionary line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("dictionary line {line}: alias `{alias}` already defined")]
    DuplicateAlias { line: usize, alias: String },
    #[error("reading dictionary: {0}")]
    Io(#[from] std::io::Error),
}

/// One linker hit in a snippet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub entity_id: String,
    pub surface: String,
    pub snippet_id: String,
    /// Linker confidence; always negative, closer to zero is more confident.
    pub fel_score: f64,
}

/// Anything that can turn snippet text into mentions. The bundled
/// [`LinkerDictionary`] is one implementation.
pub trait EntityLinker: Send + Sync {
    fn link(&self, snippet_id: &str, text: &str) -> Vec<EntityMention>;

    /// Display label for an entity, if the linker knows one.
    fn label(&self, entity_id: &str) -> Option<&str>;
}

#[derive(Debug, Clone)]
struct AliasEntry {
    entity_id: String,
    base_score: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LinkerDictionary {
    aliases: HashMap<Vec<String>, AliasEntry>,
    labels: HashMap<String, String>,
    longest_alias: usize,
}

impl LinkerDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an alias. The first label given for an entity wins.
    pub fn insert(
        &mut self,
        alias: &str,
        entity_id: &str,
        label: &str,
        base_score: f64,
    ) -> Result<(), DictionaryError> {
        self.insert_at(0, alias, entity_id, label, base_score)
    }

    fn insert_at(
        &mut self,
        line: usize,
        alias: &str,
        entity_id: &str,
        label: &str,
        base_score: f64,
    ) -> Result<(), DictionaryError> {
        let invalid = |message: &str| DictionaryError::Invalid {
            line,
            message: message.to_string(),
        };
        let key = tokenize(alias);
        if key.is_empty() {
            return Err(invalid("alias has no alphanumeric content"));
        }
        if entity_id.is_empty() {
            return Err(invalid("empty entity id"));
        }
        if label.trim().is_empty() {
            return Err(invalid("empty label"));
        }
        if !(base_score.is_finite() && base_score < 0.0) {
            return Err(invalid("base score must be a finite negative number"));
        }
        if self.aliases.contains_key(&key) {
            return Err(DictionaryError::DuplicateAlias {
                line,
                alias: alias.to_string(),
            });
        }
        self.longest_alias = self.longest_alias.max(key.len());
        self.aliases.insert(
            key,
            AliasEntry {
                entity_id: entity_id.to_string(),
                base_score,
            },
        );
        self.labels
            .entry(entity_id.to_string())
            .or_insert_with(|| label.to_string());
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut dict = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 4 {
                return Err(DictionaryError::Invalid {
                    line,
                    message: format!("expected 4 tab-separated columns, found {}", cols.len()),
                });
            }
            let score: f64 = cols[3].trim().parse().map_err(|_| DictionaryError::Invalid {
                line,
                message: format!("bad base score `{}`", cols[3]),
            })?;
            dict.insert_at(line, cols[0], cols[1].trim(), cols[2].trim(), score)?;
        }
        Ok(dict)
    }

    pub fn load(path: &Path) -> Result<Self, DictionaryError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }
}

impl EntityLinker for LinkerDictionary {
    fn link(&self, snippet_id: &str, text: &str) -> Vec<EntityMention> {
        extract_mentions(self, snippet_id, text)
    }

    fn label(&self, entity_id: &str) -> Option<&str> {
        self.labels.get(entity_id).map(String::as_str)
    }
}

/// Left-to-right, longest-match, non-overlapping scan over token sequences.
pub fn extract_mentions(
    dict: &LinkerDictionary,
    snippet_id: &str,
    text: &str,
) -> Vec<EntityMention> {
    let tokens = tokenize_spans(text);
    let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let max = dict.longest_alias.min(tokens.len() - i);
        let hit = (1..=max)
            .rev()
            .find_map(|len| dict.aliases.get(&words[i..i + len]).map(|e| (len, e)));
        match hit {
            Some((len, entry)) => {
                let span = tokens[i].span.start..tokens[i + len - 1].span.end;
                out.push(EntityMention {
                    entity_id: entry.entity_id.clone(),
                    surface: text[span].to_string(),
                    snippet_id: snippet_id.to_string(),
                    fel_score: entry.base_score,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    out
}
