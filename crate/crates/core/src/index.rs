//! Positional inverted index over a reference corpus, answering
//! "how many documents contain both phrases" queries.
//!
//! # File format
//!
//! All integers little-endian.
//!
//! ```text
//! magic        8 bytes   "HGPIDX\0\0"
//! version      u32       1
//! tag_len      u32, tag bytes (UTF-8 tokenizer tag)
//! doc_count    u32
//! doc_count x  { id_len u32, id bytes }            sorted by doc id
//! term_count   u32
//! term_count x { term_len u32, term bytes,         sorted by term bytes
//!                posting_count u32,
//!                posting_count x { doc u32, pos_count u32, pos_count x u32 } }
//! ```
//!
//! `doc` is the position of the document in the doc table.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, Read, Write};
use std::path::Path;

use crate::tokenize::{tokenize, TOKENIZER_TAG};

const MAGIC: &[u8; 8] = b"HGPIDX\0\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate document id `{0}`")]
    DuplicateDoc(String),
    #[error("invalid query: {0}")]
    Input(String),
    #[error("index tokenizer `{found}` does not match `{expected}`")]
    TokenizerMismatch { expected: String, found: String },
    #[error("corrupt index file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusDocument {
    pub doc_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    /// Strictly ascending token positions.
    pub positions: Vec<u32>,
}

/// Source of document-level co-occurrence counts. [`PositionalIndex`] is
/// the local implementation; a remote search service could provide another.
pub trait CooccurrenceSource: Send + Sync {
    fn tokenizer_tag(&self) -> &str;

    /// Number of documents in which both phrases occur.
    fn pair_count(&self, phrase_a: &str, phrase_b: &str) -> Result<u64, IndexError>;

    /// Number of documents containing the phrase.
    fn phrase_count(&self, phrase: &str) -> Result<u64, IndexError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalIndex {
    doc_ids: Vec<String>,
    postings: HashMap<String, Vec<Posting>>,
    tokenizer_tag: String,
}

/// Builds the index. Documents are numbered in doc-id order, so postings
/// are sorted by doc id regardless of input order.
pub fn build_index<I>(corpus: I) -> Result<PositionalIndex, IndexError>
where
    I: IntoIterator<Item = CorpusDocument>,
{
    let mut docs: Vec<CorpusDocument> = corpus.into_iter().collect();
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    if let Some(w) = docs.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
        return Err(IndexError::DuplicateDoc(w[0].doc_id.clone()));
    }

    let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
    for (doc, d) in docs.iter().enumerate() {
        let doc = doc as u32;
        let mut local: HashMap<String, Vec<u32>> = HashMap::new();
        for (pos, tok) in tokenize(&d.text).into_iter().enumerate() {
            local.entry(tok).or_default().push(pos as u32);
        }
        for (tok, positions) in local {
            postings.entry(tok).or_default().push(Posting { doc, positions });
        }
    }

    Ok(PositionalIndex {
        doc_ids: docs.into_iter().map(|d| d.doc_id).collect(),
        postings,
        tokenizer_tag: TOKENIZER_TAG.to_string(),
    })
}

/// Reads every `.txt` file of a directory; the file stem is the doc id.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<CorpusDocument>, IndexError> {
    let mut docs = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            let doc_id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| IndexError::Input(format!("non UTF-8 file name {}", path.display())))?
                .to_string();
            docs.push(CorpusDocument {
                doc_id,
                text: std::fs::read_to_string(&path)?,
            });
        }
    }
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(docs)
}

fn phrase_tokens(phrase: &str) -> Result<Vec<String>, IndexError> {
    let toks = tokenize(phrase);
    if toks.is_empty() {
        return Err(IndexError::Input(format!(
            "phrase `{phrase}` has no indexable tokens"
        )));
    }
    Ok(toks)
}

impl PositionalIndex {
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn tokenizer_tag(&self) -> &str {
        &self.tokenizer_tag
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, token: &str) -> &[Posting] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    fn doc_number(&self, doc_id: &str) -> Option<u32> {
        self.doc_ids
            .binary_search_by(|d| d.as_str().cmp(doc_id))
            .ok()
            .map(|i| i as u32)
    }

    fn positions(&self, token: &str, doc: u32) -> Option<&[u32]> {
        let list = self.postings.get(token)?;
        list.binary_search_by_key(&doc, |p| p.doc)
            .ok()
            .map(|i| list[i].positions.as_slice())
    }

    fn doc_has_phrase(&self, doc: u32, toks: &[String]) -> bool {
        let Some(lists) = toks
            .iter()
            .map(|t| self.positions(t, doc))
            .collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        lists[0].iter().any(|&start| {
            lists[1..].iter().enumerate().all(|(k, l)| {
                l.binary_search(&(start + k as u32 + 1)).is_ok()
            })
        })
    }

    /// Whether the phrase occurs contiguously in the given document.
    pub fn phrase_match(&self, doc_id: &str, phrase: &str) -> Result<bool, IndexError> {
        let toks = phrase_tokens(phrase)?;
        Ok(self
            .doc_number(doc_id)
            .is_some_and(|doc| self.doc_has_phrase(doc, &toks)))
    }

    /// Ascending doc numbers of documents containing the phrase.
    fn phrase_docs_tokens(&self, toks: &[String]) -> Vec<u32> {
        // drive from the rarest token
        let rarest = toks
            .iter()
            .min_by_key(|t| self.postings(t).len())
            .expect("non-empty phrase");
        self.postings(rarest)
            .iter()
            .map(|p| p.doc)
            .filter(|&doc| self.doc_has_phrase(doc, toks))
            .collect()
    }

    pub fn phrase_docs(&self, phrase: &str) -> Result<Vec<u32>, IndexError> {
        Ok(self.phrase_docs_tokens(&phrase_tokens(phrase)?))
    }

    /// Documents containing both phrases. Symmetric in its arguments.
    pub fn pair_count(&self, phrase_a: &str, phrase_b: &str) -> Result<u64, IndexError> {
        let a = phrase_tokens(phrase_a)?;
        let b = phrase_tokens(phrase_b)?;
        if a == b {
            return Err(IndexError::Input(format!(
                "phrases `{phrase_a}` and `{phrase_b}` are identical after tokenization"
            )));
        }
        let da = self.phrase_docs_tokens(&a);
        let db = self.phrase_docs_tokens(&b);
        Ok(intersect_count(&da, &db))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut w = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let mut r = io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut r)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        put_u32(w, FORMAT_VERSION)?;
        put_str(w, &self.tokenizer_tag)?;
        put_u32(w, self.doc_ids.len() as u32)?;
        for id in &self.doc_ids {
            put_str(w, id)?;
        }
        let sorted: BTreeMap<&String, &Vec<Posting>> = self.postings.iter().collect();
        put_u32(w, sorted.len() as u32)?;
        for (term, list) in sorted {
            put_str(w, term)?;
            put_u32(w, list.len() as u32)?;
            for p in list {
                put_u32(w, p.doc)?;
                put_u32(w, p.positions.len() as u32)?;
                for &pos in &p.positions {
                    put_u32(w, pos)?;
                }
            }
        }
        Ok(())
    }

    /// Reads an index and checks it was built with this crate's tokenizer.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, IndexError> {
        let idx = Self::read_any_tokenizer(r)?;
        if idx.tokenizer_tag != TOKENIZER_TAG {
            return Err(IndexError::TokenizerMismatch {
                expected: TOKENIZER_TAG.into(),
                found: idx.tokenizer_tag,
            });
        }
        Ok(idx)
    }

    fn read_any_tokenizer<R: Read>(r: &mut R) -> Result<Self, IndexError> {
        let corrupt = |m: &str| IndexError::Corrupt(m.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = get_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(IndexError::Corrupt(format!("unsupported version {version}")));
        }
        let tokenizer_tag = get_str(r)?;
        let doc_count = get_u32(r)?;
        let mut doc_ids = Vec::new();
        for _ in 0..doc_count {
            doc_ids.push(get_str(r)?);
        }
        if doc_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(corrupt("doc table not strictly sorted"));
        }
        let term_count = get_u32(r)?;
        let mut postings = HashMap::new();
        for _ in 0..term_count {
            let term = get_str(r)?;
            let n = get_u32(r)?;
            let mut list: Vec<Posting> = Vec::new();
            for _ in 0..n {
                let doc = get_u32(r)?;
                if doc >= doc_count || list.last().is_some_and(|p| p.doc >= doc) {
                    return Err(corrupt("postings out of order"));
                }
                let np = get_u32(r)?;
                if np == 0 {
                    return Err(corrupt("empty position list"));
                }
                let mut positions = Vec::new();
                for _ in 0..np {
                    positions.push(get_u32(r)?);
                }
                if positions.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(corrupt("positions not strictly ascending"));
                }
                list.push(Posting { doc, positions });
            }
            if postings.insert(term, list).is_some() {
                return Err(corrupt("duplicate term"));
            }
        }
        Ok(PositionalIndex {
            doc_ids,
            postings,
            tokenizer_tag,
        })
    }
}

impl CooccurrenceSource for PositionalIndex {
    fn tokenizer_tag(&self) -> &str {
        &self.tokenizer_tag
    }

    fn pair_count(&self, phrase_a: &str, phrase_b: &str) -> Result<u64, IndexError> {
        PositionalIndex::pair_count(self, phrase_a, phrase_b)
    }

    fn phrase_count(&self, phrase: &str) -> Result<u64, IndexError> {
        Ok(self.phrase_docs(phrase)?.len() as u64)
    }
}

fn intersect_count(a: &[u32], b: &[u32]) -> u64 {
    let small: HashSet<u32> = if a.len() <= b.len() { a } else { b }.iter().copied().collect();
    let large = if a.len() <= b.len() { b } else { a };
    large.iter().filter(|d| small.contains(d)).count() as u64
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn get_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_str<R: Read>(r: &mut R) -> Result<String, IndexError> {
    let len = get_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| IndexError::Corrupt("invalid UTF-8 string".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> CorpusDocument {
        CorpusDocument {
            doc_id: id.into(),
            text: text.into(),
        }
    }

    /// Naive scan: tokenize the document and look for the token window.
    fn scan_has_phrase(text: &str, phrase: &str) -> bool {
        let words = tokenize(text);
        let p = tokenize(phrase);
        words.windows(p.len()).any(|w| w == p.as_slice())
    }

    #[test]
    fn empty_corpus() {
        let idx = build_index(Vec::new()).unwrap();
        assert_eq!(idx.doc_count(), 0);
        assert_eq!(idx.pair_count("a", "b").unwrap(), 0);
    }

    #[test]
    fn single_document_postings() {
        let idx = build_index(vec![doc("d1", "Computer Science")]).unwrap();
        assert_eq!(idx.postings("computer"), &[Posting { doc: 0, positions: vec![0] }]);
        assert_eq!(idx.postings("science"), &[Posting { doc: 0, positions: vec![1] }]);
    }

    #[test]
    fn duplicate_doc_rejected() {
        assert!(matches!(
            build_index(vec![doc("a", "x"), doc("a", "y")]),
            Err(IndexError::DuplicateDoc(_))
        ));
    }

    #[test]
    fn phrase_order_matters() {
        let idx = build_index(vec![doc("d", "information retrieval systems")]).unwrap();
        assert!(idx.phrase_match("d", "information retrieval").unwrap());
        assert!(!idx.phrase_match("d", "retrieval information").unwrap());
        assert!(!idx.phrase_match("missing", "information").unwrap());
        assert!(matches!(idx.phrase_match("d", " -- "), Err(IndexError::Input(_))));
    }

    #[test]
    fn pair_count_small_fixture() {
        let idx = build_index(vec![
            doc("doc1", "Computer science meets information retrieval."),
            doc("doc2", "Computer science is broad."),
            doc("doc3", "Information retrieval, science computer."),
        ])
        .unwrap();
        assert_eq!(idx.pair_count("computer science", "information retrieval").unwrap(), 1);
        assert_eq!(idx.pair_count("information retrieval", "computer science").unwrap(), 1);
        assert_eq!(idx.pair_count("quantum", "gravity").unwrap(), 0);
        assert!(idx.pair_count("Computer Science", "computer-science").is_err());
    }

    #[test]
    fn file_roundtrip_and_tag_check() {
        let idx = build_index(vec![doc("b", "beta alpha beta"), doc("a", "alpha gamma")]).unwrap();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = PositionalIndex::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, idx);

        // same bytes for the same corpus
        let mut again = Vec::new();
        build_index(vec![doc("a", "alpha gamma"), doc("b", "beta alpha beta")])
            .unwrap()
            .write_to(&mut again)
            .unwrap();
        assert_eq!(again, buf);

        let mut other = idx.clone();
        other.tokenizer_tag = "whitespace/0".into();
        let mut buf = Vec::new();
        other.write_to(&mut buf).unwrap();
        assert!(matches!(
            PositionalIndex::read_from(&mut buf.as_slice()),
            Err(IndexError::TokenizerMismatch { .. })
        ));
        assert!(matches!(
            PositionalIndex::read_from(&mut &b"NOTANIDX\x01\0\0\0"[..]),
            Err(IndexError::Corrupt(_))
        ));
    }

    fn arb_corpus() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(
            proptest::collection::vec(prop_oneof!["[a-e]", Just("A".to_string()), Just(",".to_string())], 0..40)
                .prop_map(|w| w.join(" ")),
            0..30,
        )
    }

    proptest! {
        #[test]
        fn postings_match_full_scan(texts in arb_corpus()) {
            let docs: Vec<_> = texts.iter().enumerate().map(|(i, t)| doc(&format!("d{i:03}"), t)).collect();
            let idx = build_index(docs.clone()).unwrap();
            for (n, d) in docs.iter().enumerate() {
                for (pos, tok) in tokenize(&d.text).iter().enumerate() {
                    let p = idx.postings(tok).iter().find(|p| p.doc == n as u32).unwrap();
                    prop_assert!(p.positions.contains(&(pos as u32)));
                }
            }
            for list in idx.postings.values() {
                prop_assert!(list.windows(2).all(|w| w[0].doc < w[1].doc));
                prop_assert!(list.iter().all(|p| p.positions.windows(2).all(|w| w[0] < w[1])));
            }
        }

        #[test]
        fn phrase_match_matches_scan(texts in arb_corpus(), phrase in proptest::collection::vec("[a-e]", 1..4)) {
            let phrase = phrase.join(" ");
            let docs: Vec<_> = texts.iter().enumerate().map(|(i, t)| doc(&format!("d{i:03}"), t)).collect();
            let idx = build_index(docs.clone()).unwrap();
            for d in &docs {
                prop_assert_eq!(idx.phrase_match(&d.doc_id, &phrase).unwrap(), scan_has_phrase(&d.text, &phrase));
            }
        }

        #[test]
        fn adding_a_document_never_lowers_counts(texts in arb_corpus(), extra in "[a-e ]{0,60}") {
            let docs: Vec<_> = texts.iter().enumerate().map(|(i, t)| doc(&format!("d{i:03}"), t)).collect();
            let before = build_index(docs.clone()).unwrap();
            let mut more = docs;
            more.push(doc("zz", &extra));
            let after = build_index(more).unwrap();
            for (a, b) in [("a", "b"), ("a b", "c"), ("d", "e a")] {
                let c0 = before.pair_count(a, b).unwrap();
                let c1 = after.pair_count(a, b).unwrap();
                prop_assert!(c0 <= c1);
                prop_assert!(c1 <= after.doc_count() as u64);
            }
        }
    }
}
