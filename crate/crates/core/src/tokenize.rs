//! The one tokenizer shared by the linker and the co-occurrence index, so
//! that entity labels and indexed text agree on what a phrase is.

use std::ops::Range;

/// Written into index files; a mismatch on load is rejected.
pub const TOKENIZER_TAG: &str = "unicode-lower-alnum/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Byte span in the source string.
    pub span: Range<usize>,
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize_spans(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(Token {
                    text: text[s..i].to_lowercase(),
                    span: s..i,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: text[s..].to_lowercase(),
            span: s..text.len(),
        });
    }
    out
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|t| t.text).collect()
}
