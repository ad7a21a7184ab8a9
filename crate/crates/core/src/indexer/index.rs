//! The query-language inverted index and its on-disk layout.
//!
//! ```text
//! "PSQIDX01"
//! u64 vocab_count, u64 doc_count, u64 total_postings
//! vocab_count × (u64 byte_len, UTF-8 token)          in id order
//! doc_count   × (u64 byte_len, UTF-8 doc id)         in ordinal order
//! vocab_count × (u64 list_len, list_len × (u32 doc ordinal, f64 weight))
//! u64 byte_len, JSON metadata
//! ```
//!
//! All integers and floats are little-endian. Postings are stored in index
//! order: weight descending, ties by ordinal ascending.

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use crate::error::{PsqError, Result};
use crate::pruning::PruningConfig;
use crate::textprep::TokenizerConfig;

pub const MAGIC: &[u8; 8] = b"PSQIDX01";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posting {
    pub doc: u32,
    pub weight: f64,
}

/// Build parameters recorded in the index trailer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMetadata {
    pub alpha: f64,
    pub lm_floor: f64,
    pub table_floor: Option<f64>,
    pub pruning: Option<PruningConfig>,
    pub doc_tokenizer: Option<TokenizerConfig>,
    pub query_tokenizer: Option<TokenizerConfig>,
    pub build_timestamp: Option<String>,
    pub tool_version: String,
}

impl Default for IndexMetadata {
    fn default() -> Self {
        IndexMetadata {
            alpha: super::weight::DEFAULT_ALPHA,
            lm_floor: super::lm::DEFAULT_LM_FLOOR,
            table_floor: None,
            pruning: None,
            doc_tokenizer: None,
            query_tokenizer: None,
            build_timestamp: None,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    pub(crate) vocab: Vocabulary,
    pub(crate) doc_ids: Vec<String>,
    pub(crate) postings: Vec<Vec<Posting>>,
    pub metadata: IndexMetadata,
}

/// Size of a serialized index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexSize {
    pub bytes: u64,
    pub total_postings: u64,
}

pub(crate) fn sort_postings(list: &mut [Posting]) {
    list.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.doc.cmp(&b.doc)));
}

impl InvertedIndex {
    /// Assembles an index, sorting every postings list. Fails on
    /// non-positive weights, out-of-range or repeated ordinals, or a vocabulary
    /// and postings count mismatch.
    pub fn from_parts(
        vocab: Vocabulary,
        doc_ids: Vec<String>,
        mut postings: Vec<Vec<Posting>>,
        metadata: IndexMetadata,
    ) -> Result<Self> {
        if vocab.len() != postings.len() {
            return Err(PsqError::Format(format!(
                "{} vocabulary entries but {} postings lists",
                vocab.len(),
                postings.len()
            )));
        }
        for list in &mut postings {
            sort_postings(list);
        }
        let index = InvertedIndex {
            vocab,
            doc_ids,
            postings,
            metadata,
        };
        index.check()?;
        Ok(index)
    }

    fn check(&self) -> Result<()> {
        let mut ids = HashSet::with_capacity(self.doc_ids.len());
        for d in &self.doc_ids {
            if !ids.insert(d.as_str()) {
                return Err(PsqError::DuplicateDocument(d.clone()));
            }
        }
        let n = self.doc_ids.len();
        let mut seen = vec![false; n];
        for (id, list) in self.postings.iter().enumerate() {
            let token = &self.vocab.tokens()[id];
            for p in list {
                if !(p.weight > 0.0 && p.weight.is_finite()) {
                    return Err(PsqError::Format(format!(
                        "non-positive weight {} for {token}",
                        p.weight
                    )));
                }
                let slot = seen.get_mut(p.doc as usize).ok_or_else(|| {
                    PsqError::Format(format!("ordinal {} out of range for {token}", p.doc))
                })?;
                if std::mem::replace(slot, true) {
                    return Err(PsqError::Format(format!(
                        "document {} appears twice under {token}",
                        p.doc
                    )));
                }
            }
            if list.windows(2).any(|w| {
                w[0].weight < w[1].weight || (w[0].weight == w[1].weight && w[0].doc > w[1].doc)
            }) {
                return Err(PsqError::Format(format!(
                    "postings for {token} out of order"
                )));
            }
            for p in list {
                seen[p.doc as usize] = false;
            }
        }
        Ok(())
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn postings(&self, token: &str) -> &[Posting] {
        self.vocab
            .id(token)
            .map_or(&[], |id| self.postings[id as usize].as_slice())
    }

    pub fn postings_by_id(&self, id: u32) -> &[Posting] {
        &self.postings[id as usize]
    }

    pub fn total_postings(&self) -> u64 {
        self.postings.iter().map(|l| l.len() as u64).sum()
    }

    /// Weight of `token` for the document with ordinal `doc`, 0 if absent.
    pub fn weight(&self, token: &str, doc: u32) -> f64 {
        self.postings(token)
            .iter()
            .find(|p| p.doc == doc)
            .map_or(0.0, |p| p.weight)
    }

    fn metadata_json(&self) -> Vec<u8> {
        serde_json::to_vec(&self.metadata).expect("metadata is always serializable")
    }

    /// Exact length of [`InvertedIndex::to_bytes`] without materializing it.
    pub fn serialized_len(&self) -> u64 {
        let strings = |v: &[String]| v.iter().map(|s| 8 + s.len() as u64).sum::<u64>();
        MAGIC.len() as u64
            + 24
            + strings(self.vocab.tokens())
            + strings(&self.doc_ids)
            + self.postings.len() as u64 * 8
            + self.total_postings() * 12
            + 8
            + self.metadata_json().len() as u64
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        let put_u64 = |out: &mut W, v: u64| out.write_all(&v.to_le_bytes());
        out.write_all(MAGIC)?;
        put_u64(&mut out, self.vocab.len() as u64)?;
        put_u64(&mut out, self.doc_ids.len() as u64)?;
        put_u64(&mut out, self.total_postings())?;
        for s in self.vocab.tokens().iter().chain(&self.doc_ids) {
            put_u64(&mut out, s.len() as u64)?;
            out.write_all(s.as_bytes())?;
        }
        for list in &self.postings {
            put_u64(&mut out, list.len() as u64)?;
            for p in list {
                out.write_all(&p.doc.to_le_bytes())?;
                out.write_all(&p.weight.to_le_bytes())?;
            }
        }
        let meta = self.metadata_json();
        put_u64(&mut out, meta.len() as u64)?;
        out.write_all(&meta)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.serialized_len() as usize);
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(PsqError::Format("bad magic bytes".into()));
        }
        let vocab_count = r.count()?;
        let doc_count = r.count()?;
        let total = r.u64()?;
        let mut vocab = Vocabulary::new();
        for _ in 0..vocab_count {
            let tok = r.string()?;
            if vocab.id(&tok).is_some() {
                return Err(PsqError::Format(format!(
                    "token {tok:?} repeated in vocabulary"
                )));
            }
            vocab.intern(&tok);
        }
        let doc_ids = (0..doc_count)
            .map(|_| r.string())
            .collect::<Result<Vec<_>>>()?;
        let mut postings = Vec::with_capacity(vocab_count);
        let mut seen_total = 0u64;
        for _ in 0..vocab_count {
            let len = r.count()?;
            if len.saturating_mul(12) > r.remaining() {
                return Err(PsqError::Format("postings list overruns file".into()));
            }
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let doc = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
                let weight = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
                list.push(Posting { doc, weight });
            }
            seen_total += len as u64;
            postings.push(list);
        }
        if seen_total != total {
            return Err(PsqError::Format(format!(
                "header declares {total} postings, found {seen_total}"
            )));
        }
        let meta_len = r.count()?;
        let metadata: IndexMetadata = serde_json::from_slice(r.take(meta_len)?)?;
        if r.remaining() != 0 {
            return Err(PsqError::Format(format!(
                "{} trailing bytes",
                r.remaining()
            )));
        }
        let index = InvertedIndex {
            vocab,
            doc_ids,
            postings,
            metadata,
        };
        index.check()?;
        Ok(index)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| PsqError::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| PsqError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn index_size(index: &InvertedIndex) -> IndexSize {
    IndexSize {
        bytes: index.serialized_len(),
        total_postings: index.total_postings(),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(PsqError::Format(format!(
                "unexpected end of data at byte {} (wanted {n})",
                self.pos
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A u64 used as an element count; rejects values that cannot fit in the
    /// remaining input.
    fn count(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > self.remaining() as u64 {
            return Err(PsqError::Format(format!(
                "count {v} exceeds remaining input"
            )));
        }
        Ok(v as usize)
    }

    fn string(&mut self) -> Result<String> {
        let len = self.count()?;
        let raw = self.take(len)?;
        Ok(std::str::from_utf8(raw)?.to_owned())
    }
}
