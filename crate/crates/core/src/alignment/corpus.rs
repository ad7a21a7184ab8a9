use std::fs;
use std::path::Path;

use crate::error::{PsqError, Result};
use crate::textprep::{TokenSequence, Tokenizer};

/// Sentence-aligned bilingual text. Source is the document language, target
/// the query language. Both sides of every pair are non-empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParallelCorpus {
    pairs: Vec<(TokenSequence, TokenSequence)>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<(TokenSequence, TokenSequence)>) -> Result<Self> {
        if let Some(i) = pairs.iter().position(|(s, t)| s.is_empty() || t.is_empty()) {
            return Err(PsqError::InvalidConfig(format!(
                "sentence pair {i} has an empty side"
            )));
        }
        Ok(ParallelCorpus { pairs })
    }

    /// Convenience for tests and fixtures: whitespace-split string pairs.
    pub fn from_pairs<S: AsRef<str>, T: AsRef<str>>(pairs: &[(S, T)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(s, t)| {
                    (
                        TokenSequence::from_whitespace(s.as_ref()),
                        TokenSequence::from_whitespace(t.as_ref()),
                    )
                })
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(TokenSequence, TokenSequence)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Outcome of reading a parallel corpus from disk.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: ParallelCorpus,
    /// Lines dropped because one side was empty after tokenization.
    pub skipped: usize,
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
    Ok(String::from_utf8(bytes).map_err(|e| e.utf8_error())?)
}

fn collect_pairs<'a>(
    lines: impl Iterator<Item = (&'a str, &'a str)>,
    source: &Tokenizer,
    target: &Tokenizer,
) -> LoadedCorpus {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (s, t) in lines {
        let (s, t) = (source.tokenize(s), target.tokenize(t));
        if s.is_empty() || t.is_empty() {
            skipped += 1;
        } else {
            pairs.push((s, t));
        }
    }
    LoadedCorpus {
        corpus: ParallelCorpus { pairs },
        skipped,
    }
}

/// Reads two line-aligned files (source sentences, target sentences).
pub fn load_parallel_files(
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
    source: &Tokenizer,
    target: &Tokenizer,
) -> Result<LoadedCorpus> {
    let (sp, tp) = (source_path.as_ref(), target_path.as_ref());
    let src = read_utf8(sp)?;
    let tgt = read_utf8(tp)?;
    let (ns, nt) = (src.lines().count(), tgt.lines().count());
    if ns != nt {
        return Err(PsqError::InvalidConfig(format!(
            "{} has {ns} lines but {} has {nt}",
            sp.display(),
            tp.display()
        )));
    }
    Ok(collect_pairs(src.lines().zip(tgt.lines()), source, target))
}

/// Reads `source_sentence<TAB>target_sentence` lines.
pub fn load_parallel_tsv(
    path: impl AsRef<Path>,
    source: &Tokenizer,
    target: &Tokenizer,
) -> Result<LoadedCorpus> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let (s, t) = line.split_once('\t').ok_or_else(|| {
            PsqError::parse(
                path.display().to_string(),
                i + 1,
                "expected source<TAB>target",
            )
        })?;
        lines.push((s, t));
    }
    Ok(collect_pairs(lines.into_iter(), source, target))
}
