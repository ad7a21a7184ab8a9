//! Seeded generator for small bilingual test collections.
//!
//! A hidden translation distribution links document-language tokens `sNNNN`
//! to query-language tokens `tNNNN`: each source token has a primary target
//! plus a few weaker alternatives. Parallel text is sampled from that
//! distribution, so a trained table is noisy in realistic ways. Each topic's
//! query names a few target tokens; relevant documents mention source tokens
//! that reach those targets, some only through an alternative translation,
//! so aggressive pruning costs recall.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alignment::ParallelCorpus;
use crate::evaluation::Qrels;
use crate::search::Query;
use crate::textprep::TokenSequence;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub vocab_size: usize,
    pub parallel_pairs: usize,
    pub docs: usize,
    pub topics: usize,
    pub relevant_per_topic: usize,
    pub doc_len: (usize, usize),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            vocab_size: 400,
            parallel_pairs: 6000,
            docs: 1000,
            topics: 40,
            relevant_per_topic: 10,
            doc_len: (30, 60),
            seed: 17,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub parallel: ParallelCorpus,
    pub docs: Vec<(String, TokenSequence)>,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
    /// Query-language text for the background unigram model.
    pub lm_tokens: Vec<String>,
}

fn src(i: usize) -> String {
    format!("s{i:04}")
}

fn tgt(i: usize) -> String {
    format!("t{i:04}")
}

/// The hidden P(target | source) for every source token.
fn hidden_translations(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<(usize, f64)>> {
    (0..n)
        .map(|i| {
            let primary = rng.random_range(0.45..0.85);
            let alts = rng.random_range(1..=6usize);
            let mut weights: Vec<f64> = (0..alts).map(|k| 1.0 / (k as f64 + 1.5)).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w *= (1.0 - primary) / total;
            }
            let mut out = vec![(i, primary)];
            for w in weights {
                let mut t = rng.random_range(0..n);
                while out.iter().any(|&(x, _)| x == t) {
                    t = rng.random_range(0..n);
                }
                out.push((t, w));
            }
            out
        })
        .collect()
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCollection {
    let n = spec.vocab_size.max(8);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let hidden = hidden_translations(&mut rng, n);
    let zipf =
        WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0))).expect("positive weights");
    let samplers: Vec<WeightedIndex<f64>> = hidden
        .iter()
        .map(|d| WeightedIndex::new(d.iter().map(|&(_, p)| p)).expect("positive weights"))
        .collect();

    let mut pairs = Vec::with_capacity(spec.parallel_pairs);
    let mut lm_tokens = Vec::new();
    for _ in 0..spec.parallel_pairs {
        let len = rng.random_range(4..=14);
        let s: Vec<usize> = (0..len).map(|_| zipf.sample(&mut rng)).collect();
        let mut t: Vec<usize> = s
            .iter()
            .map(|&w| hidden[w][samplers[w].sample(&mut rng)].0)
            .collect();
        t.shuffle(&mut rng);
        lm_tokens.extend(t.iter().map(|&w| tgt(w)));
        pairs.push((
            TokenSequence::new(s.into_iter().map(src).collect()).expect("valid tokens"),
            TokenSequence::new(t.into_iter().map(tgt).collect()).expect("valid tokens"),
        ));
    }
    let parallel = ParallelCorpus::new(pairs).expect("non-empty sides");

    // Topic vocabulary comes from the mid-frequency band so it is neither
    // ubiquitous nor missing from the parallel text.
    let band: Vec<usize> = (n / 10..n / 2).collect();
    let mut docs: Vec<Vec<String>> = (0..spec.docs)
        .map(|_| {
            let len = rng.random_range(spec.doc_len.0..=spec.doc_len.1);
            (0..len).map(|_| src(zipf.sample(&mut rng))).collect()
        })
        .collect();
    let mut queries = Vec::with_capacity(spec.topics);
    let mut qrels = Qrels::new();
    let mut order: Vec<usize> = (0..spec.docs).collect();
    for topic in 0..spec.topics {
        let terms = rng.random_range(1..=3usize);
        let mut q_targets: Vec<usize> = Vec::with_capacity(terms);
        while q_targets.len() < terms {
            let t = band[rng.random_range(0..band.len())];
            if !q_targets.contains(&t) {
                q_targets.push(t);
            }
        }
        // source tokens reaching the query targets only as an alternative
        let indirect: Vec<usize> = (0..n)
            .filter(|&s| hidden[s][1..].iter().any(|(t, _)| q_targets.contains(t)))
            .collect();
        let qid = format!("q{topic:03}");
        order.shuffle(&mut rng);
        for &d in order.iter().take(spec.relevant_per_topic) {
            let mentions = rng.random_range(2..=5);
            for _ in 0..mentions {
                let s = if !indirect.is_empty() && rng.random_bool(0.4) {
                    indirect[rng.random_range(0..indirect.len())]
                } else {
                    q_targets[rng.random_range(0..q_targets.len())]
                };
                let pos = rng.random_range(0..=docs[d].len());
                docs[d].insert(pos, src(s));
            }
            // documents can be relevant to more than one topic
            let _ = qrels.insert(&qid, &format!("doc{d:05}"), 1);
        }
        for &d in order.iter().skip(spec.relevant_per_topic).take(3) {
            let _ = qrels.insert(&qid, &format!("doc{d:05}"), 0);
        }
        queries.push(Query::new(
            qid,
            TokenSequence::new(q_targets.into_iter().map(tgt).collect()).expect("valid tokens"),
        ));
    }
    let docs = docs
        .into_iter()
        .enumerate()
        .map(|(i, toks)| {
            (
                format!("doc{i:05}"),
                TokenSequence::new(toks).expect("valid tokens"),
            )
        })
        .collect();
    SyntheticCollection {
        parallel,
        docs,
        queries,
        qrels,
        lm_tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let spec = SyntheticSpec {
            parallel_pairs: 200,
            docs: 50,
            topics: 5,
            relevant_per_topic: 4,
            ..Default::default()
        };
        let a = generate(&spec);
        let b = generate(&spec);
        assert_eq!(a.docs, b.docs);
        assert_eq!(a.queries, b.queries);
        assert_eq!(a.docs.len(), 50);
        assert_eq!(a.parallel.len(), 200);
        assert_eq!(a.queries.len(), 5);
        assert!(a
            .queries
            .iter()
            .all(|q| a.qrels.relevant_count(&q.query_id) == 4));
    }
}
