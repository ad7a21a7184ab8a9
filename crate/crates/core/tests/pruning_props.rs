use proptest::prelude::*;
use psq::alignment::{Translation, TranslationTable};
use psq::pruning::{prune, prune_stats, PruningConfig, TopK};

fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(1.0),
        0.001f64..1.0,
        (0..7i32).prop_map(|e| 10f64.powi(-e))
    ]
}

fn table() -> impl Strategy<Value = TranslationTable> {
    prop::collection::vec(prop::collection::vec(weight(), 1..20), 1..10).prop_map(|lists| {
        TranslationTable::from_lists(lists.into_iter().enumerate().map(|(s, raw)| {
            let total: f64 = raw.iter().sum();
            let list: Vec<Translation> = raw
                .iter()
                .enumerate()
                .map(|(t, w)| Translation::new(format!("t{t}"), w / total))
                .collect();
            (format!("s{s}"), list)
        }))
        .unwrap()
    })
}

fn config(renormalize: bool) -> impl Strategy<Value = PruningConfig> {
    let pmf = prop_oneof![Just(0.0), Just(1e-6), 0.0f64..0.6];
    let cdf = prop_oneof![Just(1.0), 0.01f64..=1.0];
    let topk = prop_oneof![Just(TopK::Unbounded), (1usize..25).prop_map(TopK::Limit)];
    (pmf, cdf, topk).prop_map(move |(p, c, k)| PruningConfig::new(p, c, k, renormalize).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kept_lists_are_prefixes(t in table(), cfg in config(false)) {
        let pruned = prune(&t, &cfg).unwrap();
        for (s, kept) in pruned.iter() {
            let full = t.get(s).unwrap();
            prop_assert!(!kept.is_empty());
            prop_assert_eq!(kept, &full[..kept.len()]);
        }
    }

    #[test]
    fn composition_matches_combined_config(t in table(), c1 in config(false), c2 in config(false)) {
        let twice = prune(&prune(&t, &c1).unwrap(), &c2).unwrap();
        let once = prune(&t, &c1.combine(&c2)).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn tightening_never_lengthens(t in table(), cfg in config(false), f in 0.0f64..1.0) {
        let base = prune(&t, &cfg).unwrap();
        let len = |tab: &TranslationTable, s: &str| tab.get(s).map_or(0, |l| l.len());
        let tighter = [
            PruningConfig { pmf_min: cfg.pmf_min + (1.0 - cfg.pmf_min) * f, ..cfg },
            PruningConfig { cdf_max: (cfg.cdf_max * f).max(1e-3), ..cfg },
            PruningConfig {
                top_k: TopK::Limit(((cfg.top_k.limit().min(30) as f64) * f).max(1.0) as usize),
                ..cfg
            },
        ];
        for tight in tighter {
            let p = prune(&t, &tight).unwrap();
            for (s, _) in t.iter() {
                prop_assert!(len(&p, s) <= len(&base, s), "{} vs {}", tight, cfg);
            }
        }
    }

    #[test]
    fn identity_is_a_no_op(t in table()) {
        prop_assert_eq!(prune(&t, &PruningConfig::identity()).unwrap(), t);
    }

    #[test]
    fn renormalized_lists_sum_to_one(t in table(), cfg in config(true)) {
        let pruned = prune(&t, &cfg).unwrap();
        for (s, list) in pruned.iter() {
            let sum: f64 = list.iter().map(|x| x.prob).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "{} sums to {}", s, sum);
        }
    }

    #[test]
    fn retained_mass_in_unit_interval(t in table(), cfg in config(false)) {
        let report = prune_stats(&t, &prune(&t, &cfg).unwrap());
        prop_assert!(report.retained_mass >= 0.0 && report.retained_mass <= 1.0 + 1e-12);
        prop_assert!(report.after.entries <= report.before.entries);
    }
}

#[test]
fn pmf_floor_removes_sub_floor_entries() {
    let t = TranslationTable::from_lists([(
        "a",
        vec![
            Translation::new("x", 1.0 - 5e-7),
            Translation::new("y", 5e-7),
        ],
    )])
    .unwrap();
    let p = prune(&t, &PruningConfig::pmf_floor(1e-6).unwrap()).unwrap();
    assert_eq!(p.get("a").unwrap().len(), 1);
}
