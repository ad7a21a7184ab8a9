//! IBM Model 1 lexical translation estimated with EM.
//!
//! Parameters are t(target | source), initialized uniformly over the targets
//! that co-occur with each source token. No NULL source word is used. The
//! E-step runs over fixed corpus shards whose boundaries depend only on the
//! corpus size; shard counts are summed in shard order so the parallel and
//! sequential paths agree bit for bit.

use std::collections::{BTreeMap, HashMap};

use super::corpus::ParallelCorpus;
use super::table::{sort_translations, Translation, TranslationTable};
use crate::error::{PsqError, Result};
use crate::exec::Exec;

pub const DEFAULT_ITERATIONS: usize = 5;

/// Probabilities below this are treated as numeric noise and dropped.
pub const PROB_FLOOR: f64 = 1e-12;

const MAX_SHARDS: usize = 64;
const MIN_SHARD_PAIRS: usize = 256;

#[derive(Debug, Clone)]
pub struct Model1Trainer {
    pub iterations: usize,
    pub exec: Exec,
}

impl Default for Model1Trainer {
    fn default() -> Self {
        Model1Trainer {
            iterations: DEFAULT_ITERATIONS,
            exec: Exec::default(),
        }
    }
}

/// A trained table plus the corpus log-likelihood before the first update
/// and after every iteration (`iterations + 1` values).
#[derive(Debug, Clone, PartialEq)]
pub struct Model1Fit {
    pub table: TranslationTable,
    pub log_likelihood: Vec<f64>,
}

struct Encoded {
    source_vocab: Vec<String>,
    target_vocab: Vec<String>,
    pairs: Vec<(Vec<u32>, Vec<u32>)>,
}

fn intern(vocab: &mut Vec<String>, ids: &mut HashMap<String, u32>, tok: &str) -> u32 {
    if let Some(&id) = ids.get(tok) {
        return id;
    }
    let id = vocab.len() as u32;
    vocab.push(tok.to_owned());
    ids.insert(tok.to_owned(), id);
    id
}

fn encode(corpus: &ParallelCorpus) -> Encoded {
    let (mut sv, mut tv) = (Vec::new(), Vec::new());
    let (mut sid, mut tid) = (HashMap::new(), HashMap::new());
    let pairs = corpus
        .pairs()
        .iter()
        .map(|(s, t)| {
            (
                s.iter().map(|w| intern(&mut sv, &mut sid, w)).collect(),
                t.iter().map(|w| intern(&mut tv, &mut tid, w)).collect(),
            )
        })
        .collect();
    Encoded {
        source_vocab: sv,
        target_vocab: tv,
        pairs,
    }
}

/// Row-compressed t(target | source) over co-occurring pairs only.
struct Params {
    row_start: Vec<usize>,
    cols: Vec<u32>,
    probs: Vec<f64>,
}

impl Params {
    fn uniform(enc: &Encoded) -> Self {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); enc.source_vocab.len()];
        for (s, t) in &enc.pairs {
            for &si in s {
                rows[si as usize].extend_from_slice(t);
            }
        }
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut probs = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            let p = 1.0 / row.len() as f64;
            probs.extend(std::iter::repeat_n(p, row.len()));
            cols.extend(row);
            row_start.push(cols.len());
        }
        Params {
            row_start,
            cols,
            probs,
        }
    }

    #[inline]
    fn slot(&self, s: u32, t: u32) -> usize {
        let (lo, hi) = (self.row_start[s as usize], self.row_start[s as usize + 1]);
        lo + self.cols[lo..hi]
            .binary_search(&t)
            .expect("every co-occurring pair has a slot")
    }
}

/// Expected counts and log-likelihood of the current parameters for one shard.
fn e_step(params: &Params, pairs: &[(Vec<u32>, Vec<u32>)]) -> (Vec<f64>, f64) {
    let mut counts = vec![0.0; params.probs.len()];
    let mut ll = 0.0;
    let mut slots = Vec::new();
    for (src, tgt) in pairs {
        let norm = (src.len() as f64).ln();
        for &t in tgt {
            slots.clear();
            slots.extend(src.iter().map(|&s| params.slot(s, t)));
            let denom: f64 = slots.iter().map(|&k| params.probs[k]).sum();
            ll += denom.ln() - norm;
            if denom > 0.0 {
                for &k in &slots {
                    counts[k] += params.probs[k] / denom;
                }
            }
        }
    }
    (counts, ll)
}

impl Model1Trainer {
    pub fn new(iterations: usize) -> Self {
        Model1Trainer {
            iterations,
            ..Self::default()
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn train(&self, corpus: &ParallelCorpus) -> Result<Model1Fit> {
        if corpus.is_empty() {
            return Err(PsqError::EmptyInput("parallel corpus"));
        }
        if self.iterations == 0 {
            return Err(PsqError::InvalidConfig(
                "Model 1 needs at least one EM iteration".into(),
            ));
        }
        let enc = encode(corpus);
        let mut params = Params::uniform(&enc);
        let shard_len = enc.pairs.len().div_ceil(MAX_SHARDS).max(MIN_SHARD_PAIRS);
        let shards: Vec<&[(Vec<u32>, Vec<u32>)]> = enc.pairs.chunks(shard_len).collect();

        let mut trace = Vec::with_capacity(self.iterations + 1);
        for _ in 0..self.iterations {
            let parts = self.exec.map(&shards, |shard| e_step(&params, shard));
            let mut counts = vec![0.0; params.probs.len()];
            let mut ll = 0.0;
            for (c, l) in parts {
                for (acc, x) in counts.iter_mut().zip(c) {
                    *acc += x;
                }
                ll += l;
            }
            trace.push(ll);
            for w in params.row_start.windows(2) {
                let row = &mut counts[w[0]..w[1]];
                let total: f64 = row.iter().sum();
                for (p, c) in params.probs[w[0]..w[1]].iter_mut().zip(row.iter()) {
                    *p = if total > 0.0 { c / total } else { 0.0 };
                }
            }
        }
        let final_ll: f64 = self
            .exec
            .map(&shards, |shard| e_step(&params, shard).1)
            .into_iter()
            .sum();
        trace.push(final_ll);

        let mut entries = BTreeMap::new();
        for (s, w) in params.row_start.windows(2).enumerate() {
            let mut list: Vec<Translation> = (w[0]..w[1])
                .filter(|&k| params.probs[k] >= PROB_FLOOR)
                .map(|k| {
                    Translation::new(
                        enc.target_vocab[params.cols[k] as usize].clone(),
                        params.probs[k],
                    )
                })
                .collect();
            if list.is_empty() {
                continue;
            }
            sort_translations(&mut list);
            entries.insert(enc.source_vocab[s].clone(), list);
        }
        Ok(Model1Fit {
            table: TranslationTable::from_sorted_unchecked(entries),
            log_likelihood: trace,
        })
    }
}

/// Trains with `iterations` rounds of EM on the default execution path.
pub fn train_model1(corpus: &ParallelCorpus, iterations: usize) -> Result<TranslationTable> {
    Model1Trainer::new(iterations)
        .train(corpus)
        .map(|fit| fit.table)
}

/// Model 1 corpus log-likelihood under `table`, up to the constant
/// sentence-length term: Σ_pairs Σ_j log( (1/|s|) Σ_i t(t_j | s_i) ).
pub fn model1_log_likelihood(corpus: &ParallelCorpus, table: &TranslationTable) -> f64 {
    corpus
        .pairs()
        .iter()
        .map(|(s, t)| {
            let norm = (s.len() as f64).ln();
            t.iter()
                .map(|tw| s.iter().map(|sw| table.prob(sw, tw)).sum::<f64>().ln() - norm)
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(p: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_pairs(p).unwrap()
    }

    #[test]
    fn unambiguous_pairs_are_certain() {
        let t = train_model1(&corpus(&[("a", "x"), ("b", "y")]), 5).unwrap();
        assert_eq!(t.prob("a", "x"), 1.0);
        assert_eq!(t.prob("b", "y"), 1.0);
        assert_eq!(t.num_entries(), 2);
    }

    #[test]
    fn symmetric_split() {
        for iters in [1, 2, 5, 20] {
            let t = train_model1(&corpus(&[("a", "x"), ("a", "y")]), iters).unwrap();
            assert_eq!(t.prob("a", "x"), 0.5);
            assert_eq!(t.prob("a", "y"), 0.5);
        }
    }

    /// Hand-run EM: after one iteration t(x|a) = 0.75, t(y|a) = 0.25 and b
    /// stays uniform; the second iteration gives b counts x 0.4, y 2/3.
    #[test]
    fn disambiguation_by_second_pair() {
        let c = corpus(&[("a b", "x y"), ("a", "x")]);
        let one = train_model1(&c, 1).unwrap();
        assert!((one.prob("a", "x") - 0.75).abs() < 1e-15);
        assert!((one.prob("b", "x") - 0.5).abs() < 1e-15);
        let two = train_model1(&c, 2).unwrap();
        let bx = 0.4 / (0.4 + 2.0 / 3.0);
        assert!((two.prob("b", "x") - bx).abs() < 1e-12);
        assert!((two.prob("a", "x") - 1.6 / (1.6 + 1.0 / 3.0)).abs() < 1e-12);

        let five = train_model1(&c, 5).unwrap();
        assert!(five.prob("a", "x") > five.prob("a", "y"));
        assert!(five.prob("b", "y") > five.prob("b", "x"));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            train_model1(&ParallelCorpus::default(), 5),
            Err(PsqError::EmptyInput(_))
        ));
        assert!(train_model1(&corpus(&[("a", "x")]), 0).is_err());
    }

    #[test]
    fn trace_matches_table_likelihood() {
        let c = corpus(&[
            ("a b c", "x y"),
            ("a c", "x z"),
            ("b", "y"),
            ("c a", "z z x"),
        ]);
        let fit = Model1Trainer::new(4).train(&c).unwrap();
        assert_eq!(fit.log_likelihood.len(), 5);
        let direct = model1_log_likelihood(&c, &fit.table);
        assert!((direct - fit.log_likelihood[4]).abs() < 1e-9);
        assert!(fit.log_likelihood.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn sequential_and_default_agree_bitwise() {
        let pairs: Vec<(String, String)> = (0..1500)
            .map(|i| {
                (
                    format!("s{} s{} s{}", i % 17, i % 5, i % 11),
                    format!("t{} t{}", i % 17, i % 5),
                )
            })
            .collect();
        let c = ParallelCorpus::from_pairs(&pairs).unwrap();
        let a = Model1Trainer::new(3)
            .with_exec(Exec::Sequential)
            .train(&c)
            .unwrap();
        let b = Model1Trainer::new(3).train(&c).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.log_likelihood, b.log_likelihood);
    }
}
