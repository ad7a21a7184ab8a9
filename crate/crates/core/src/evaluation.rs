//! MAP and recall@k against TREC relevance judgments.
//!
//! Only topics with at least one relevant judgment are evaluated. A judged
//! topic with no run counts as a complete miss; a run for an unjudged topic
//! is skipped with a warning.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{PsqError, Result};
use crate::search::RankedList;

pub const DEFAULT_RECALL_CUTOFF: usize = 100;

/// Relevance grades keyed by query then document. Grades above 0 are
/// relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a judgment; fails if the pair is already judged.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u32) -> Result<()> {
        let row = self.judgments.entry(query_id.to_owned()).or_default();
        if row.insert(doc_id.to_owned(), grade).is_some() {
            return Err(PsqError::InvalidConfig(format!(
                "duplicate judgment for ({query_id}, {doc_id})"
            )));
        }
        Ok(())
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<u32> {
        self.judgments.get(query_id)?.get(doc_id).copied()
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id).is_some_and(|g| g > 0)
    }

    pub fn relevant_count(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map_or(0, |r| r.values().filter(|&&g| g > 0).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses `query_id iteration doc_id grade` lines.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut qrels = Qrels::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let [qid, _, doc, grade] = f[..] else {
                return Err(PsqError::parse(
                    origin,
                    i + 1,
                    format!("expected 4 columns, found {}", f.len()),
                ));
            };
            let grade: u32 = grade.parse().map_err(|_| {
                PsqError::parse(
                    origin,
                    i + 1,
                    format!("grade {grade:?} is not a non-negative integer"),
                )
            })?;
            qrels.insert(qid, doc, grade).map_err(|_| {
                PsqError::parse(
                    origin,
                    i + 1,
                    format!("duplicate judgment for ({qid}, {doc})"),
                )
            })?;
        }
        Ok(qrels)
    }
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
    Qrels::parse(std::str::from_utf8(&bytes)?, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopicScores {
    pub average_precision: f64,
    pub recall: f64,
    pub relevant: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub recall_cutoff: usize,
    pub per_topic: BTreeMap<String, TopicScores>,
    pub map: f64,
    pub recall: f64,
    pub evaluated_topics: usize,
}

/// Average precision over the full list and recall in the top `cutoff`.
pub fn topic_scores(docs: &[&str], relevant: &HashSet<&str>, cutoff: usize) -> TopicScores {
    let r = relevant.len();
    if r == 0 {
        return TopicScores {
            average_precision: 0.0,
            recall: 0.0,
            relevant: 0,
        };
    }
    let mut found = 0usize;
    let mut found_at_cutoff = 0usize;
    let mut precision_sum = 0.0;
    for (i, d) in docs.iter().enumerate() {
        if relevant.contains(d) {
            found += 1;
            precision_sum += found as f64 / (i + 1) as f64;
            if i < cutoff {
                found_at_cutoff += 1;
            }
        }
    }
    TopicScores {
        average_precision: precision_sum / r as f64,
        recall: found_at_cutoff as f64 / r as f64,
        relevant: r,
    }
}

pub fn evaluate(runs: &[RankedList], qrels: &Qrels, recall_cutoff: usize) -> Result<EvalReport> {
    if recall_cutoff == 0 {
        return Err(PsqError::InvalidConfig(
            "recall cutoff must be at least 1".into(),
        ));
    }
    let mut by_query: BTreeMap<&str, &RankedList> = BTreeMap::new();
    for run in runs {
        if qrels.relevant_count(&run.query_id) == 0 {
            log::warn!(
                "skipping run for query {} with no relevant judgments",
                run.query_id
            );
            continue;
        }
        if by_query.insert(&run.query_id, run).is_some() {
            return Err(PsqError::InvalidConfig(format!(
                "more than one ranked list for query {}",
                run.query_id
            )));
        }
    }
    let mut per_topic = BTreeMap::new();
    for qid in qrels.query_ids() {
        let relevant: HashSet<&str> = qrels.judgments[qid]
            .iter()
            .filter(|(_, &g)| g > 0)
            .map(|(d, _)| d.as_str())
            .collect();
        if relevant.is_empty() {
            continue;
        }
        let docs: Vec<&str> = by_query
            .get(qid)
            .map(|r| r.doc_ids().collect())
            .unwrap_or_default();
        per_topic.insert(
            qid.to_owned(),
            topic_scores(&docs, &relevant, recall_cutoff),
        );
    }
    let n = per_topic.len();
    let mean = |f: fn(&TopicScores) -> f64| {
        if n == 0 {
            0.0
        } else {
            per_topic.values().map(f).sum::<f64>() / n as f64
        }
    };
    Ok(EvalReport {
        recall_cutoff,
        map: mean(|t| t.average_precision),
        recall: mean(|t| t.recall),
        evaluated_topics: n,
        per_topic,
    })
}

/// Topic-count-weighted pooling of several collections' results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledMetrics {
    pub map: f64,
    pub recall: f64,
    pub topics: usize,
}

pub fn microaverage(reports: &[EvalReport]) -> Result<PooledMetrics> {
    if reports.is_empty() {
        return Err(PsqError::EmptyInput("evaluation reports"));
    }
    let topics: usize = reports.iter().map(|r| r.evaluated_topics).sum();
    let pooled = |f: fn(&EvalReport) -> f64| {
        if topics == 0 {
            0.0
        } else {
            reports
                .iter()
                .map(|r| f(r) * r.evaluated_topics as f64)
                .sum::<f64>()
                / topics as f64
        }
    };
    Ok(PooledMetrics {
        map: pooled(|r| r.map),
        recall: pooled(|r| r.recall),
        topics,
    })
}

impl EvalReport {
    /// Aligned text table: one row per topic, then the means.
    pub fn to_table(&self) -> String {
        let recall = format!("R@{}", self.recall_cutoff);
        let width = self
            .per_topic
            .keys()
            .map(String::len)
            .chain([5])
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>5}",
            "topic", "AP", recall, "rel"
        );
        for (qid, t) in &self.per_topic {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8.4}  {:>8.4}  {:>5}",
                qid, t.average_precision, t.recall, t.relevant
            );
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>8.4}  {:>8.4}  {:>5}",
            "all", self.map, self.recall, self.evaluated_topics
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::ScoredDoc;

    fn run(qid: &str, docs: &[&str]) -> RankedList {
        RankedList {
            query_id: qid.into(),
            items: docs
                .iter()
                .enumerate()
                .map(|(i, d)| ScoredDoc {
                    doc_id: d.to_string(),
                    ordinal: i as u32,
                    score: -(i as f64),
                })
                .collect(),
        }
    }

    #[test]
    fn qrels_parsing() {
        let q = Qrels::parse("1 0 d1 1\n1 0 d2 0\n", "q").unwrap();
        assert_eq!(q.grade("1", "d1"), Some(1));
        assert_eq!(q.grade("1", "d2"), Some(0));
        assert_eq!(q.relevant_count("1"), 1);
        assert!(matches!(
            Qrels::parse("1 0 d1 1\n1 0 d1 2\n", "q"),
            Err(PsqError::Parse { line: 2, .. })
        ));
        assert!(Qrels::parse("", "q").unwrap().is_empty());
        assert!(Qrels::parse("1 0 d1\n", "q").is_err());
        assert!(Qrels::parse("1 0 d1 -1\n", "q").is_err());
    }

    #[test]
    fn hand_computed() {
        let qrels = Qrels::parse("q 0 a 1\n", "q").unwrap();
        let r = evaluate(&[run("q", &["a", "b"])], &qrels, 100).unwrap();
        assert_eq!((r.map, r.recall), (1.0, 1.0));
        let r = evaluate(&[run("q", &["b", "a"])], &qrels, 100).unwrap();
        assert_eq!((r.map, r.recall), (0.5, 1.0));

        let qrels = Qrels::parse("q 0 a 1\nq 0 c 2\n", "q").unwrap();
        let r = evaluate(&[run("q", &["a", "b", "c"])], &qrels, 100).unwrap();
        assert!((r.map - 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-12);
        let r = evaluate(&[run("q", &["a", "b", "c"])], &qrels, 2).unwrap();
        assert_eq!(r.recall, 0.5);
    }

    #[test]
    fn topic_selection() {
        let qrels = Qrels::parse("q1 0 a 1\nq2 0 b 0\nq3 0 c 1\n", "q").unwrap();
        let r = evaluate(
            &[run("q1", &["a"]), run("q2", &["b"]), run("zz", &["a"])],
            &qrels,
            100,
        )
        .unwrap();
        assert_eq!(r.evaluated_topics, 2);
        assert!(!r.per_topic.contains_key("q2"));
        assert_eq!(r.per_topic["q3"].average_precision, 0.0);
        assert_eq!(r.map, 0.5);
        assert!(evaluate(&[], &qrels, 0).is_err());

        let r = evaluate(&[], &qrels, 100).unwrap();
        assert!(r
            .per_topic
            .values()
            .all(|t| t.average_precision == 0.0 && t.recall == 0.0));
        let r = evaluate(&[], &Qrels::new(), 100).unwrap();
        assert_eq!((r.evaluated_topics, r.map), (0, 0.0));
    }

    #[test]
    fn pooling() {
        let mk = |mean: f64, n: usize| EvalReport {
            recall_cutoff: 100,
            per_topic: BTreeMap::new(),
            map: mean,
            recall: mean,
            evaluated_topics: n,
        };
        assert_eq!(microaverage(&[mk(0.3, 7)]).unwrap().recall, 0.3);
        let p = microaverage(&[mk(0.2, 10), mk(0.8, 30)]).unwrap();
        assert!((p.recall - 0.65).abs() < 1e-12);
        assert_eq!(p.topics, 40);
        let p = microaverage(&[mk(0.2, 5), mk(0.6, 5)]).unwrap();
        assert!((p.map - 0.4).abs() < 1e-12);
        assert!(microaverage(&[]).is_err());
    }

    #[test]
    fn table_output() {
        let qrels = Qrels::parse("q 0 a 1\n", "q").unwrap();
        let t = evaluate(&[run("q", &["a"])], &qrels, 100)
            .unwrap()
            .to_table();
        assert!(t.contains("R@100"));
        assert!(t.lines().last().unwrap().starts_with("all"));
    }
}
