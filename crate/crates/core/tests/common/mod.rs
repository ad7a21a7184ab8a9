#![allow(dead_code)]

use std::collections::HashSet;

use psq::alignment::{Translation, TranslationTable};
use psq::indexer::{build_unigram_lm, UnigramLM};
use psq::search::Query;
use psq::textprep::TokenSequence;
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn src(i: usize) -> String {
    format!("s{i}")
}

pub fn tgt(i: usize) -> String {
    format!("t{i}")
}

/// Random table over `s0..n_src` / `t0..n_tgt`; every source gets between 1
/// and `max_len` targets, probabilities bounded away from zero.
pub fn random_table<R: Rng>(
    rng: &mut R,
    n_src: usize,
    n_tgt: usize,
    max_len: usize,
) -> TranslationTable {
    let lists = (0..n_src).map(|s| {
        let len = rng.random_range(1..=max_len.min(n_tgt));
        let targets: Vec<usize> = rand::seq::index::sample(rng, n_tgt, len).into_vec();
        let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.02..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let list: Vec<Translation> = targets
            .into_iter()
            .zip(raw)
            .map(|(t, w)| Translation::new(tgt(t), w / total))
            .collect();
        (src(s), list)
    });
    TranslationTable::from_lists(lists).expect("valid random table")
}

/// Like [`random_table`] but with heavy ties and wide dynamic range, which
/// exercises the pruning boundaries.
pub fn random_rough_table<R: Rng>(rng: &mut R) -> TranslationTable {
    let n_src = rng.random_range(1..=12);
    let lists = (0..n_src).map(|s| {
        let len = rng.random_range(1..=20);
        let raw: Vec<f64> = (0..len)
            .map(|_| match rng.random_range(0..4) {
                0 => 1.0,
                1 => 10f64.powi(-rng.random_range(0..7)),
                _ => rng.random_range(0.001..1.0),
            })
            .collect();
        let total: f64 = raw.iter().sum();
        (
            src(s),
            raw.iter()
                .enumerate()
                .map(|(t, w)| Translation::new(tgt(t), w / total))
                .collect::<Vec<_>>(),
        )
    });
    TranslationTable::from_lists(lists).expect("valid rough table")
}

pub fn random_tokens<R: Rng>(rng: &mut R, vocab: &[String], len: usize) -> TokenSequence {
    TokenSequence::new(
        (0..len)
            .map(|_| vocab.choose(rng).unwrap().clone())
            .collect(),
    )
    .unwrap()
}

/// A small randomized retrieval problem.
pub struct Instance {
    pub table: TranslationTable,
    pub lm: UnigramLM,
    pub alpha: f64,
    pub docs: Vec<(String, TokenSequence)>,
    pub queries: Vec<Query>,
}

pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let n_src = rng.random_range(2..=50);
    let n_tgt = rng.random_range(2..=50);
    let table = random_table(rng, n_src, n_tgt, 6);
    // the document side also mentions tokens missing from the table
    let src_vocab: Vec<String> = (0..n_src + 3).map(src).collect();
    let tgt_vocab: Vec<String> = (0..n_tgt + 2).map(tgt).collect();
    let lm_len = rng.random_range(20..200);
    let lm_text = random_tokens(rng, &tgt_vocab[..n_tgt], lm_len);
    let lm = build_unigram_lm(lm_text.iter(), 1e-7).unwrap();
    let alpha = *[0.1, 0.5, 0.9].choose(rng).unwrap();
    let n_docs = rng.random_range(1..=30);
    let docs = (0..n_docs)
        .map(|d| {
            let len = rng.random_range(1..=25);
            (format!("d{d}"), random_tokens(rng, &src_vocab, len))
        })
        .collect();
    let queries = (0..5)
        .map(|q| {
            let len = rng.random_range(1..=5);
            Query::new(format!("q{q}"), random_tokens(rng, &tgt_vocab, len))
        })
        .collect();
    Instance {
        table,
        lm,
        alpha,
        docs,
        queries,
    }
}

/// O(n²) domination check: true where some other point is no larger, no
/// worse, and strictly better on at least one axis.
pub fn brute_force_dominated(points: &[(u64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(s, m)| {
            points
                .iter()
                .any(|&(s2, m2)| s2 <= s && m2 >= m && (s2 < s || m2 > m))
        })
        .collect()
}

/// Reference AP and recall@cutoff written straight from the definitions.
pub fn brute_force_topic(
    ranked: &[String],
    relevant: &HashSet<String>,
    cutoff: usize,
) -> (f64, f64) {
    let r = relevant.len() as f64;
    let mut hits = 0usize;
    let mut sum_prec = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        if relevant.contains(d) {
            hits += 1;
            sum_prec += hits as f64 / (i + 1) as f64;
        }
    }
    let found = ranked
        .iter()
        .take(cutoff)
        .filter(|d| relevant.contains(*d))
        .count();
    (sum_prec / r, found as f64 / r)
}

/// Synthetic collection prepared for sweeps: trained table, LM, vectors.
pub struct Prepared {
    pub collection: psq::synthetic::SyntheticCollection,
    pub table: TranslationTable,
    pub lm: UnigramLM,
    pub vectors: Vec<psq::indexer::DocumentVector>,
}

pub fn prepare(spec: &psq::synthetic::SyntheticSpec) -> Prepared {
    let collection = psq::synthetic::generate(spec);
    let table = psq::alignment::train_model1(&collection.parallel, 5).unwrap();
    let lm = build_unigram_lm(collection.lm_tokens.iter(), 1e-7).unwrap();
    let vectors = collection
        .docs
        .iter()
        .map(|(id, t)| psq::indexer::DocumentVector::from_tokens(id.clone(), t))
        .collect();
    Prepared {
        collection,
        table,
        lm,
        vectors,
    }
}

impl Prepared {
    pub fn inputs(&self) -> psq::sweep::SweepInputs<'_> {
        psq::sweep::SweepInputs {
            docs: &self.vectors,
            table: &self.table,
            lm: &self.lm,
            queries: &self.collection.queries,
            qrels: &self.collection.qrels,
        }
    }
}
