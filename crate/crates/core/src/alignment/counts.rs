use std::collections::BTreeMap;

use super::table::{sort_translations, Translation, TranslationTable};
use crate::error::{PsqError, Result};
use crate::textprep::TokenSequence;

/// Co-occurrence mass of aligned (source, target) token pairs.
///
/// Combining several aligners is plain concatenation: feed all of their
/// aligned pairs through [`AlignmentCounts::add`] (or [`merge`]) before
/// normalizing.
///
/// [`merge`]: AlignmentCounts::merge
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignmentCounts {
    counts: BTreeMap<String, BTreeMap<String, f64>>,
}

impl AlignmentCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `mass` (clamped at zero) to the (source, target) pair.
    pub fn add(&mut self, source: &str, target: &str, mass: f64) {
        let row = self.counts.entry(source.to_owned()).or_default();
        *row.entry(target.to_owned()).or_insert(0.0) += mass.max(0.0);
    }

    pub fn merge(&mut self, other: &AlignmentCounts) {
        for (s, row) in &other.counts {
            for (t, &c) in row {
                self.add(s, t, c);
            }
        }
    }

    pub fn get(&self, source: &str, target: &str) -> f64 {
        self.counts
            .get(source)
            .and_then(|r| r.get(target))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.counts.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.counts
            .iter()
            .flat_map(|(s, row)| row.iter().map(move |(t, &c)| (s.as_str(), t.as_str(), c)))
    }
}

/// Counts occurrences of each aligned (source, target) pair.
pub fn counts_from_alignments<I, S, T>(aligned_pairs: I) -> AlignmentCounts
where
    I: IntoIterator<Item = (S, T)>,
    S: AsRef<str>,
    T: AsRef<str>,
{
    let mut counts = AlignmentCounts::new();
    for (s, t) in aligned_pairs {
        counts.add(s.as_ref(), t.as_ref(), 1.0);
    }
    counts
}

/// Maximum-likelihood estimate of P(target | source) from counts. Sources
/// whose total mass is zero are omitted.
pub fn normalize_counts(counts: &AlignmentCounts) -> Result<TranslationTable> {
    if counts.is_empty() {
        return Err(PsqError::EmptyInput("alignment counts"));
    }
    let mut entries = BTreeMap::new();
    for (source, row) in &counts.counts {
        let total: f64 = row.values().sum();
        if total <= 0.0 {
            continue;
        }
        let mut list: Vec<Translation> = row
            .iter()
            .filter(|(_, &c)| c > 0.0)
            .map(|(t, &c)| Translation::new(t.clone(), c / total))
            .collect();
        sort_translations(&mut list);
        entries.insert(source.clone(), list);
    }
    Ok(TranslationTable::from_sorted_unchecked(entries))
}

/// Expands one line of Pharaoh-format links (`i-j` pairs, `i` indexing the
/// source sentence, `j` the target) into aligned token pairs.
pub fn pharaoh_pairs(
    source: &TokenSequence,
    target: &TokenSequence,
    links: &str,
) -> std::result::Result<Vec<(String, String)>, String> {
    links
        .split_whitespace()
        .map(|link| {
            let (i, j) = link
                .split_once('-')
                .ok_or_else(|| format!("link {link:?} is not of the form i-j"))?;
            let i: usize = i
                .parse()
                .map_err(|_| format!("bad source index in {link:?}"))?;
            let j: usize = j
                .parse()
                .map_err(|_| format!("bad target index in {link:?}"))?;
            let s = source
                .tokens()
                .get(i)
                .ok_or_else(|| format!("source index {i} out of range in {link:?}"))?;
            let t = target
                .tokens()
                .get(j)
                .ok_or_else(|| format!("target index {j} out of range in {link:?}"))?;
            Ok((s.clone(), t.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counting() {
        let c = counts_from_alignments([("a", "x"), ("a", "x"), ("a", "y")]);
        assert_eq!(c.get("a", "x"), 2.0);
        assert_eq!(c.get("a", "y"), 1.0);
        assert_eq!(c.len(), 2);
        assert!(counts_from_alignments(Vec::<(String, String)>::new()).is_empty());
    }

    #[test]
    fn normalize_examples() {
        let mut c = AlignmentCounts::new();
        c.add("a", "x", 3.0);
        c.add("a", "y", 1.0);
        let t = normalize_counts(&c).unwrap();
        assert_eq!(
            t.get("a").unwrap(),
            [Translation::new("x", 0.75), Translation::new("y", 0.25)]
        );

        let t = normalize_counts(&counts_from_alignments([("a", "x")])).unwrap();
        assert_eq!(t.prob("a", "x"), 1.0);

        let mut c = AlignmentCounts::new();
        c.add("a", "x", 2.0);
        c.add("a", "y", 2.0);
        c.add("b", "x", 1.0);
        let t = normalize_counts(&c).unwrap();
        assert_eq!(t.prob("a", "x"), 0.5);
        assert_eq!(t.prob("a", "y"), 0.5);
        assert_eq!(t.prob("b", "x"), 1.0);
        // tie broken by target byte order
        assert_eq!(t.get("a").unwrap()[0].target, "x");
    }

    #[test]
    fn zero_mass_source_omitted_and_empty_rejected() {
        let mut c = AlignmentCounts::new();
        c.add("a", "x", 0.0);
        c.add("b", "y", 1.0);
        let t = normalize_counts(&c).unwrap();
        assert!(t.get("a").is_none());
        assert!(normalize_counts(&AlignmentCounts::new()).is_err());
    }

    #[test]
    fn concatenating_aligners_reinforces_shared_pairs() {
        // Both aligners link a-x; each has one alternative the other lacks.
        let first = [("a", "x"), ("a", "y")];
        let second = [("a", "x"), ("a", "z")];
        let alone = normalize_counts(&counts_from_alignments(first)).unwrap();
        assert_eq!(alone.prob("a", "x"), alone.prob("a", "y"));

        let combined = counts_from_alignments(first.iter().chain(second.iter()).copied());
        assert_eq!(combined.get("a", "x"), 2.0);
        let table = normalize_counts(&combined).unwrap();
        assert_eq!(table.prob("a", "x"), 0.5);
        assert_eq!(table.prob("a", "y"), 0.25);
        assert_eq!(table.prob("a", "z"), 0.25);
        assert_eq!(table.get("a").unwrap()[0].target, "x");

        let mut merged = counts_from_alignments(first);
        merged.merge(&counts_from_alignments(second));
        assert_eq!(merged, combined);
    }

    #[test]
    fn pharaoh_links() {
        let s = TokenSequence::from_whitespace("das haus");
        let t = TokenSequence::from_whitespace("the house");
        let pairs = pharaoh_pairs(&s, &t, "0-0 1-1").unwrap();
        assert_eq!(
            pairs,
            [
                ("das".into(), "the".into()),
                ("haus".into(), "house".into())
            ]
        );
        assert!(pharaoh_pairs(&s, &t, "0-2").is_err());
        assert!(pharaoh_pairs(&s, &t, "01").is_err());
        assert!(pharaoh_pairs(&s, &t, "").unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn normalized_sums_to_one(pairs in prop::collection::vec(("[a-d]", "[w-z]", 1u8..5), 1..40)) {
            let mut c = AlignmentCounts::new();
            for (s, t, n) in &pairs {
                c.add(s, t, *n as f64);
            }
            let table = normalize_counts(&c).unwrap();
            for (_, list) in table.iter() {
                let sum: f64 = list.iter().map(|t| t.prob).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-9);
                prop_assert!(list.windows(2).all(|w| w[0].prob > w[1].prob
                    || (w[0].prob == w[1].prob && w[0].target < w[1].target)));
            }
        }
    }
}
