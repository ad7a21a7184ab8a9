use std::collections::{HashMap, HashSet};

use super::index::{IndexMetadata, InvertedIndex, Posting};
use super::lm::UnigramLM;
use super::translate::{DocumentVector, PROJECTION_FLOOR};
use super::vocab::Vocabulary;
use super::weight::{weight_unchecked, SmoothingConfig};
use crate::alignment::TranslationTable;
use crate::error::{PsqError, Result};
use crate::exec::Exec;
use crate::textprep::TokenSequence;

pub const DEFAULT_CHUNK_SIZE: usize = 10_000;

/// The translation table as a sparse source → (target id, probability)
/// matrix, with target ids following ascending token order.
struct AlignmentMatrix<'t> {
    targets: Vec<&'t str>,
    rows: HashMap<&'t str, Vec<(u32, f64)>>,
    background: Vec<f64>,
}

impl<'t> AlignmentMatrix<'t> {
    fn new(table: &'t TranslationTable, lm: &UnigramLM) -> Self {
        let targets: Vec<&str> = table.target_vocab().into_iter().collect();
        let ids: HashMap<&str, u32> = targets
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i as u32))
            .collect();
        let rows = table
            .iter()
            .map(|(s, list)| {
                (
                    s,
                    list.iter()
                        .map(|t| (ids[t.target.as_str()], t.prob))
                        .collect(),
                )
            })
            .collect();
        let background = targets.iter().map(|t| lm.lookup(t)).collect();
        AlignmentMatrix {
            targets,
            rows,
            background,
        }
    }

    /// Weighted query-language vector of one document, sorted by target id.
    /// Sums run over source tokens in ascending order, matching
    /// [`super::translate_document`].
    fn project(&self, doc: &DocumentVector, alpha: f64) -> Vec<(u32, f64)> {
        if doc.length == 0 {
            return Vec::new();
        }
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for (source, &tf) in &doc.entries {
            let Some(row) = self.rows.get(source.as_str()) else {
                continue;
            };
            let share = doc.share(tf);
            for &(t, p) in row {
                *acc.entry(t).or_insert(0.0) += p * share;
            }
        }
        let mut out: Vec<(u32, f64)> = acc
            .into_iter()
            .filter(|&(_, p)| p >= PROJECTION_FLOOR)
            .map(|(t, p)| (t, weight_unchecked(p, self.background[t as usize], alpha)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        out.sort_unstable_by_key(|&(t, _)| t);
        out
    }
}

/// Builds indexes from tokenized documents.
///
/// Documents are consumed `chunk_size` at a time; each chunk is projected
/// (in parallel when enabled) into per-token partial postings, and the
/// partials are merged in chunk order. The final sort makes the result
/// independent of the chunk size.
#[derive(Debug, Clone)]
pub struct IndexBuilder<'a> {
    table: &'a TranslationTable,
    lm: &'a UnigramLM,
    smoothing: SmoothingConfig,
    chunk_size: usize,
    exec: Exec,
    metadata: IndexMetadata,
}

impl<'a> IndexBuilder<'a> {
    pub fn new(table: &'a TranslationTable, lm: &'a UnigramLM, smoothing: SmoothingConfig) -> Self {
        IndexBuilder {
            table,
            lm,
            smoothing,
            chunk_size: DEFAULT_CHUNK_SIZE,
            exec: Exec::default(),
            metadata: IndexMetadata::default(),
        }
    }

    pub fn chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Metadata for the trailer; alpha and LM floor are always overwritten
    /// with the values actually used.
    pub fn metadata(mut self, metadata: IndexMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn build<I>(&self, docs: I) -> Result<InvertedIndex>
    where
        I: IntoIterator<Item = (String, TokenSequence)>,
    {
        self.try_build(docs.into_iter().map(Ok))
    }

    /// Like [`IndexBuilder::build`] over a fallible document stream, e.g. a
    /// file reader; the first error aborts the build.
    pub fn try_build<I>(&self, docs: I) -> Result<InvertedIndex>
    where
        I: IntoIterator<Item = Result<(String, TokenSequence)>>,
    {
        let mut docs = docs.into_iter();
        let mut state = self.start()?;
        loop {
            let chunk: Vec<DocumentVector> = docs
                .by_ref()
                .take(self.chunk_size)
                .map(|d| d.map(|(id, toks)| DocumentVector::from_tokens(id, &toks)))
                .collect::<Result<_>>()?;
            if chunk.is_empty() {
                break;
            }
            state.add_chunk(&chunk)?;
        }
        state.finish()
    }

    /// Builds from pre-vectorized documents (reused across sweep cells).
    pub fn build_from_vectors(&self, docs: &[DocumentVector]) -> Result<InvertedIndex> {
        let mut state = self.start()?;
        for chunk in docs.chunks(self.chunk_size.max(1)) {
            state.add_chunk(chunk)?;
        }
        state.finish()
    }

    fn start(&self) -> Result<BuildState<'_>> {
        if self.chunk_size == 0 {
            return Err(PsqError::InvalidConfig(
                "chunk size must be positive".into(),
            ));
        }
        let matrix = AlignmentMatrix::new(self.table, self.lm);
        let lists = vec![Vec::new(); matrix.targets.len()];
        Ok(BuildState {
            builder: self,
            matrix,
            doc_ids: Vec::new(),
            seen: HashSet::new(),
            lists,
        })
    }
}

struct BuildState<'b> {
    builder: &'b IndexBuilder<'b>,
    matrix: AlignmentMatrix<'b>,
    doc_ids: Vec<String>,
    seen: HashSet<String>,
    lists: Vec<Vec<Posting>>,
}

impl BuildState<'_> {
    fn add_chunk(&mut self, chunk: &[DocumentVector]) -> Result<()> {
        let base = self.doc_ids.len();
        for d in chunk {
            if !self.seen.insert(d.doc_id.clone()) {
                return Err(PsqError::DuplicateDocument(d.doc_id.clone()));
            }
            self.doc_ids.push(d.doc_id.clone());
        }
        if self.doc_ids.len() > u32::MAX as usize {
            return Err(PsqError::InvalidConfig(
                "more than u32::MAX documents".into(),
            ));
        }
        let alpha = self.builder.smoothing.alpha();
        let matrix = &self.matrix;
        let vectors = self.builder.exec.map(chunk, |d| matrix.project(d, alpha));

        // Partial postings for this chunk, then merged in chunk order.
        let mut partial: HashMap<u32, Vec<Posting>> = HashMap::new();
        for (offset, vec) in vectors.into_iter().enumerate() {
            let doc = (base + offset) as u32;
            for (t, weight) in vec {
                partial.entry(t).or_default().push(Posting { doc, weight });
            }
        }
        for (t, mut part) in partial {
            self.lists[t as usize].append(&mut part);
        }
        Ok(())
    }

    fn finish(self) -> Result<InvertedIndex> {
        if self.doc_ids.is_empty() {
            return Err(PsqError::EmptyInput("document stream"));
        }
        let mut vocab = Vocabulary::new();
        let mut postings = Vec::new();
        for (t, list) in self.matrix.targets.iter().zip(self.lists) {
            if !list.is_empty() {
                vocab.intern(t);
                postings.push(list);
            }
        }
        let mut metadata = self.builder.metadata.clone();
        metadata.alpha = self.builder.smoothing.alpha();
        metadata.lm_floor = self.builder.lm.floor();
        InvertedIndex::from_parts(vocab, self.doc_ids, postings, metadata)
    }
}

/// Builds an index with default execution and metadata.
pub fn build_index<I>(
    docs: I,
    table: &TranslationTable,
    lm: &UnigramLM,
    cfg: SmoothingConfig,
    chunk_size: usize,
) -> Result<InvertedIndex>
where
    I: IntoIterator<Item = (String, TokenSequence)>,
{
    IndexBuilder::new(table, lm, cfg)
        .chunk_size(chunk_size)
        .build(docs)
}
