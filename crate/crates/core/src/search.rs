//! Ranked retrieval over the inverted index.
//!
//! A document's score is the sum of its postings weights over the query
//! tokens, counting repeated tokens once per occurrence. This equals the
//! Jelinek-Mercer query log-likelihood minus the no-match baseline
//! `Σ ln(α·P(w|G))`, so rankings agree with [`dense_oracle_score`].

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{PsqError, Result};
use crate::exec::Exec;
use crate::indexer::{InvertedIndex, SmoothingConfig, TranslatedDocVector, UnigramLM};
use crate::textprep::{TokenSequence, Tokenizer};

pub const DEFAULT_DEPTH: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    pub tokens: TokenSequence,
}

impl Query {
    pub fn new(query_id: impl Into<String>, tokens: TokenSequence) -> Self {
        Query {
            query_id: query_id.into(),
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub ordinal: u32,
    pub score: f64,
}

/// Results for one query, best first; ties ordered by document ordinal.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: String,
    pub items: Vec<ScoredDoc>,
}

impl RankedList {
    pub fn empty(query_id: impl Into<String>) -> Self {
        RankedList {
            query_id: query_id.into(),
            items: Vec::new(),
        }
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|d| d.doc_id.as_str())
    }
}

/// Per-document sparse scores for all documents with at least one match,
/// indexed by ordinal (0 where nothing matched).
pub fn score_all(index: &InvertedIndex, query: &Query) -> Vec<f64> {
    let mut scores = vec![0.0; index.num_docs()];
    for token in query.tokens.iter() {
        for p in index.postings(token) {
            scores[p.doc as usize] += p.weight;
        }
    }
    scores
}

pub fn search(index: &InvertedIndex, query: &Query, depth: usize) -> Result<RankedList> {
    if depth == 0 {
        return Err(PsqError::InvalidConfig(
            "search depth must be at least 1".into(),
        ));
    }
    let mut touched: Vec<u32> = Vec::new();
    let mut scores = vec![0.0; index.num_docs()];
    for token in query.tokens.iter() {
        for p in index.postings(token) {
            let s = &mut scores[p.doc as usize];
            if *s == 0.0 {
                touched.push(p.doc);
            }
            *s += p.weight;
        }
    }
    let mut hits: Vec<(u32, f64)> = touched
        .into_iter()
        .map(|d| (d, scores[d as usize]))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    let by_rank = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if hits.len() > depth {
        hits.select_nth_unstable_by(depth - 1, by_rank);
        hits.truncate(depth);
    }
    hits.sort_unstable_by(by_rank);
    Ok(RankedList {
        query_id: query.query_id.clone(),
        items: hits
            .into_iter()
            .map(|(d, score)| ScoredDoc {
                doc_id: index.doc_ids()[d as usize].clone(),
                ordinal: d,
                score,
            })
            .collect(),
    })
}

/// Runs every query; a failing query yields an empty list and a warning.
pub fn batch_search(index: &InvertedIndex, queries: &[Query], depth: usize) -> Vec<RankedList> {
    batch_search_with(index, queries, depth, Exec::default())
}

pub fn batch_search_with(
    index: &InvertedIndex,
    queries: &[Query],
    depth: usize,
    exec: Exec,
) -> Vec<RankedList> {
    exec.map(queries, |q| {
        search(index, q, depth).unwrap_or_else(|e| {
            log::warn!("query {}: {e}", q.query_id);
            RankedList::empty(&q.query_id)
        })
    })
}

/// Smoothed query log-likelihood evaluated over every query token,
/// `Σ ln(α·P(w|G) + (1 − α)·P(w|D))`.
pub fn dense_oracle_score(
    query: &Query,
    doc: &TranslatedDocVector,
    lm: &UnigramLM,
    cfg: SmoothingConfig,
) -> f64 {
    let a = cfg.alpha();
    query
        .tokens
        .iter()
        .map(|w| (a * lm.lookup(w) + (1.0 - a) * doc.prob(w)).ln())
        .sum()
}

/// The score every document gets when no query token matches:
/// `Σ ln(α·P(w|G))`.
pub fn baseline_score(query: &Query, lm: &UnigramLM, cfg: SmoothingConfig) -> f64 {
    query
        .tokens
        .iter()
        .map(|w| (cfg.alpha() * lm.lookup(w)).ln())
        .sum()
}

/// Reads `query_id<TAB>query_text` lines. Queries empty after tokenization
/// are kept (they return no results) and reported by id in the second value.
pub fn load_queries(
    path: impl AsRef<Path>,
    tokenizer: &Tokenizer,
) -> Result<(Vec<Query>, Vec<String>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
    parse_queries(
        std::str::from_utf8(&bytes)?,
        &path.display().to_string(),
        tokenizer,
    )
}

pub fn parse_queries(
    text: &str,
    origin: &str,
    tokenizer: &Tokenizer,
) -> Result<(Vec<Query>, Vec<String>)> {
    let mut queries = Vec::new();
    let mut empty = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| PsqError::parse(origin, i + 1, "expected query_id<TAB>query_text"))?;
        let id = id.trim();
        if id.is_empty() || !ids.insert(id.to_owned()) {
            return Err(PsqError::parse(
                origin,
                i + 1,
                format!("empty or repeated query id {id:?}"),
            ));
        }
        let tokens = tokenizer.tokenize(body);
        if tokens.is_empty() {
            empty.push(id.to_owned());
        }
        queries.push(Query::new(id, tokens));
    }
    Ok((queries, empty))
}

/// Writes `query_id Q0 doc_id rank score run_tag` lines, ranks from 1.
pub fn write_trec_run<W: Write>(
    runs: &[RankedList],
    run_tag: &str,
    mut out: W,
) -> std::io::Result<()> {
    for run in runs {
        for (rank, d) in run.items.iter().enumerate() {
            writeln!(
                out,
                "{} Q0 {} {} {} {run_tag}",
                run.query_id,
                d.doc_id,
                rank + 1,
                d.score
            )?;
        }
    }
    Ok(())
}

pub fn save_trec_run(runs: &[RankedList], run_tag: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| PsqError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_trec_run(runs, run_tag, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| PsqError::io(path, e))
}

/// Parses a 6-column TREC run. Each query's results are ordered by the rank
/// column; ordinals are the position within that query's list.
pub fn parse_trec_run(text: &str, origin: &str) -> Result<Vec<RankedList>> {
    let mut by_query: BTreeMap<String, Vec<(u64, String, f64)>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [qid, _, doc, rank, score, _] = f[..] else {
            return Err(PsqError::parse(
                origin,
                i + 1,
                format!("expected 6 columns, found {}", f.len()),
            ));
        };
        let rank: u64 = rank
            .parse()
            .map_err(|_| PsqError::parse(origin, i + 1, format!("bad rank {rank:?}")))?;
        let score: f64 = score
            .parse()
            .map_err(|_| PsqError::parse(origin, i + 1, format!("bad score {score:?}")))?;
        if !seen.insert((qid.to_owned(), doc.to_owned())) {
            return Err(PsqError::parse(
                origin,
                i + 1,
                format!("document {doc} repeated for query {qid}"),
            ));
        }
        by_query
            .entry(qid.to_owned())
            .or_default()
            .push((rank, doc.to_owned(), score));
    }
    Ok(by_query
        .into_iter()
        .map(|(qid, mut rows)| {
            rows.sort_by_key(|r| r.0);
            RankedList {
                query_id: qid,
                items: rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, (_, doc_id, score))| ScoredDoc {
                        doc_id,
                        ordinal: i as u32,
                        score,
                    })
                    .collect(),
            }
        })
        .collect())
}

pub fn load_trec_run(path: impl AsRef<Path>) -> Result<Vec<RankedList>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
    parse_trec_run(std::str::from_utf8(&bytes)?, &path.display().to_string())
}
