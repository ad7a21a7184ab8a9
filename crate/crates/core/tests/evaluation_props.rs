mod common;

use std::collections::{BTreeMap, HashSet};

use common::brute_force_topic;
use proptest::prelude::*;
use psq::evaluation::{evaluate, Qrels};
use psq::search::{RankedList, ScoredDoc};

fn run(qid: &str, docs: &[String]) -> RankedList {
    RankedList {
        query_id: qid.into(),
        items: docs
            .iter()
            .enumerate()
            .map(|(i, d)| ScoredDoc {
                doc_id: d.clone(),
                ordinal: i as u32,
                score: (docs.len() - i) as f64,
            })
            .collect(),
    }
}

/// (ranked docs, grades) per topic over a pool of at most 20 documents.
fn topics() -> impl Strategy<Value = Vec<(Vec<String>, BTreeMap<String, u32>)>> {
    let topic = (
        Just((0..20).map(|d| format!("d{d}")).collect::<Vec<_>>()).prop_shuffle(),
        0usize..=20,
        prop::collection::btree_map((0u32..20).prop_map(|d| format!("d{d}")), 0u32..3, 0..12),
    )
        .prop_map(|(pool, n, grades)| (pool[..n].to_vec(), grades));
    prop::collection::vec(topic, 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_brute_force(topics in topics(), cutoff in 1usize..25) {
        let mut qrels = Qrels::new();
        let mut runs = Vec::new();
        let mut expected: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for (i, (ranked, grades)) in topics.iter().enumerate() {
            let qid = format!("q{i}");
            for (d, &g) in grades {
                qrels.insert(&qid, d, g).unwrap();
            }
            runs.push(run(&qid, ranked));
            let relevant: HashSet<String> =
                grades.iter().filter(|(_, &g)| g > 0).map(|(d, _)| d.clone()).collect();
            if !relevant.is_empty() {
                expected.insert(qid, brute_force_topic(ranked, &relevant, cutoff));
            }
        }
        let report = evaluate(&runs, &qrels, cutoff).unwrap();
        prop_assert_eq!(report.evaluated_topics, expected.len());
        for (qid, (ap, r)) in &expected {
            let got = &report.per_topic[qid];
            prop_assert_eq!(got.average_precision, *ap);
            prop_assert_eq!(got.recall, *r);
        }
        if !expected.is_empty() {
            let n = expected.len() as f64;
            prop_assert_eq!(report.map, expected.values().map(|v| v.0).sum::<f64>() / n);
            prop_assert_eq!(report.recall, expected.values().map(|v| v.1).sum::<f64>() / n);
        }
    }

    #[test]
    fn only_order_matters(topics in topics(), scale in 0.1f64..10.0) {
        let mut qrels = Qrels::new();
        let mut runs = Vec::new();
        for (i, (ranked, grades)) in topics.iter().enumerate() {
            let qid = format!("q{i}");
            for (d, &g) in grades {
                qrels.insert(&qid, d, g).unwrap();
            }
            runs.push(run(&qid, ranked));
        }
        let rescaled: Vec<RankedList> = runs
            .iter()
            .map(|r| RankedList {
                items: r.items.iter().map(|d| ScoredDoc { score: (d.score * scale).exp(), ..d.clone() }).collect(),
                ..r.clone()
            })
            .collect();
        prop_assert_eq!(evaluate(&runs, &qrels, 10).unwrap(), evaluate(&rescaled, &qrels, 10).unwrap());
    }
}

#[test]
fn hand_computed_average_precision() {
    let mut qrels = Qrels::new();
    qrels.insert("q1", "d2", 1).unwrap();
    let report = evaluate(
        &[run("q1", &["d1".into(), "d2".into(), "d3".into()])],
        &qrels,
        100,
    )
    .unwrap();
    assert!((report.map - 0.5).abs() < 1e-12);

    let mut qrels = Qrels::new();
    qrels.insert("q1", "d1", 1).unwrap();
    qrels.insert("q1", "d3", 1).unwrap();
    let report = evaluate(
        &[run("q1", &["d1".into(), "d2".into(), "d3".into()])],
        &qrels,
        100,
    )
    .unwrap();
    assert!((report.map - 5.0 / 6.0).abs() < 1e-12);
}
