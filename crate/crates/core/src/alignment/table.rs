use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{PsqError, Result};

/// Per-source sum tolerance right after estimation or renormalization.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Looser tolerance accepted from table files printed at reduced precision.
pub const LOAD_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub target: String,
    pub prob: f64,
}

impl Translation {
    pub fn new(target: impl Into<String>, prob: f64) -> Self {
        Translation {
            target: target.into(),
            prob,
        }
    }
}

/// Sparse conditional distribution P(target | source).
///
/// Every per-source list is sorted by probability descending, ties broken by
/// ascending byte order of the target token. All stored probabilities are
/// strictly positive and targets are unique within a list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TranslationTable {
    entries: BTreeMap<String, Vec<Translation>>,
}

pub(crate) fn sort_translations(list: &mut [Translation]) {
    list.sort_by(|a, b| {
        b.prob
            .total_cmp(&a.prob)
            .then_with(|| a.target.as_bytes().cmp(b.target.as_bytes()))
    });
}

fn check_token(token: &str, what: &str) -> std::result::Result<(), String> {
    if token.is_empty() {
        return Err(format!("empty {what} token"));
    }
    if token.chars().any(char::is_whitespace) {
        return Err(format!("{what} token {token:?} contains whitespace"));
    }
    Ok(())
}

impl TranslationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from per-source translation lists, validating and
    /// sorting each list. Per-source mass may not exceed `1 + SUM_TOLERANCE`.
    pub fn from_lists<I, S>(lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<Translation>)>,
        S: Into<String>,
    {
        Self::from_lists_with_tolerance(lists, SUM_TOLERANCE)
    }

    pub(crate) fn from_lists_with_tolerance<I, S>(lists: I, tolerance: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<Translation>)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (source, mut list) in lists {
            let source = source.into();
            check_token(&source, "source").map_err(PsqError::InvalidConfig)?;
            let mut seen = HashSet::with_capacity(list.len());
            let mut total = 0.0;
            for t in &list {
                check_token(&t.target, "target").map_err(PsqError::InvalidConfig)?;
                if !(t.prob > 0.0 && t.prob <= 1.0) {
                    return Err(PsqError::InvalidConfig(format!(
                        "P({}|{source}) = {} outside (0, 1]",
                        t.target, t.prob
                    )));
                }
                if !seen.insert(t.target.as_str()) {
                    return Err(PsqError::InvalidConfig(format!(
                        "duplicate translation {} for {source}",
                        t.target
                    )));
                }
                total += t.prob;
            }
            if total > 1.0 + tolerance {
                return Err(PsqError::InvalidConfig(format!(
                    "translations of {source} sum to {total}"
                )));
            }
            if list.is_empty() {
                continue;
            }
            sort_translations(&mut list);
            if entries.insert(source.clone(), list).is_some() {
                return Err(PsqError::InvalidConfig(format!(
                    "source token {source} listed twice"
                )));
            }
        }
        Ok(TranslationTable { entries })
    }

    /// Caller guarantees every invariant, including sort order.
    pub(crate) fn from_sorted_unchecked(entries: BTreeMap<String, Vec<Translation>>) -> Self {
        debug_assert!(entries
            .values()
            .all(|l| !l.is_empty() && l.windows(2).all(|w| w[0].prob >= w[1].prob)));
        TranslationTable { entries }
    }

    pub fn get(&self, source: &str) -> Option<&[Translation]> {
        self.entries.get(source).map(Vec::as_slice)
    }

    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.get(source)
            .and_then(|l| l.iter().find(|t| t.target == target))
            .map_or(0.0, |t| t.prob)
    }

    /// Sources in ascending byte order with their sorted translation lists.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Translation])> {
        self.entries.iter().map(|(s, l)| (s.as_str(), l.as_slice()))
    }

    pub fn num_sources(&self) -> usize {
        self.entries.len()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_vocab(&self) -> BTreeSet<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn target_vocab(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .flatten()
            .map(|t| t.target.as_str())
            .collect()
    }

    pub fn total_mass(&self, source: &str) -> f64 {
        self.get(source)
            .map_or(0.0, |l| l.iter().map(|t| t.prob).sum())
    }

    pub fn into_lists(self) -> BTreeMap<String, Vec<Translation>> {
        self.entries
    }

    /// Writes the canonical TSV form: sources ascending, each list in table
    /// order, probabilities in shortest round-trip decimal form.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (source, list) in &self.entries {
            for t in list {
                writeln!(out, "{source}\t{}\t{}", t.target, t.prob)?;
            }
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("tokens are UTF-8")
    }

    /// Parses the `source<TAB>target<TAB>probability` format. Lines may come
    /// in any order; the result is re-sorted.
    pub fn parse_tsv(text: &str, origin: &str) -> Result<Self> {
        let mut lists: BTreeMap<String, Vec<Translation>> = BTreeMap::new();
        let mut seen: HashSet<(&str, &str)> = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [source, target, prob] = fields[..] else {
                return Err(PsqError::parse(
                    origin,
                    line_no,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            };
            for (tok, what) in [(source, "source"), (target, "target")] {
                check_token(tok, what).map_err(|m| PsqError::parse(origin, line_no, m))?;
            }
            let prob: f64 = prob.trim().parse().map_err(|_| {
                PsqError::parse(origin, line_no, format!("non-numeric probability {prob:?}"))
            })?;
            if !(prob > 0.0 && prob <= 1.0) {
                return Err(PsqError::parse(
                    origin,
                    line_no,
                    format!("probability {prob} outside (0, 1]"),
                ));
            }
            if !seen.insert((source, target)) {
                return Err(PsqError::parse(
                    origin,
                    line_no,
                    format!("duplicate pair ({source}, {target})"),
                ));
            }
            lists
                .entry(source.to_owned())
                .or_default()
                .push(Translation::new(target, prob));
        }
        Self::from_lists_with_tolerance(lists, LOAD_SUM_TOLERANCE)
    }
}

pub fn load_table(path: impl AsRef<Path>) -> Result<TranslationTable> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
    let text = std::str::from_utf8(&bytes)?;
    TranslationTable::parse_tsv(text, &path.display().to_string())
}

pub fn save_table(table: &TranslationTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| PsqError::io(path, e))?;
    let mut out = BufWriter::new(file);
    table
        .write_tsv(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| PsqError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_example() {
        let t = TranslationTable::parse_tsv("a\tx\t0.75\na\ty\t0.25\n", "mem").unwrap();
        assert_eq!(
            t.get("a").unwrap(),
            [Translation::new("x", 0.75), Translation::new("y", 0.25)]
        );
    }

    #[test]
    fn out_of_range_rejected_with_line() {
        let err = TranslationTable::parse_tsv("a\ty\t0.1\na\tx\t1.5\n", "mem").unwrap_err();
        assert!(matches!(err, PsqError::Parse { line: 2, .. }), "{err}");
        for bad in [
            "a\tx\t0\n",
            "a\tx\tnan\n",
            "a\tx\t-0.2\n",
            "a\tx\tabc\n",
            "a\tx\n",
        ] {
            assert!(TranslationTable::parse_tsv(bad, "mem").is_err(), "{bad:?}");
        }
    }

    #[test]
    fn duplicate_pair_rejected() {
        let err = TranslationTable::parse_tsv("a\tx\t0.5\nb\tx\t1\na\tx\t0.25\n", "f").unwrap_err();
        assert!(matches!(err, PsqError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn unsorted_input_is_canonicalized() {
        let text = "b\tz\t1\na\ty\t0.25\na\tx\t0.25\na\tw\t0.5\n";
        let t = TranslationTable::parse_tsv(text, "f").unwrap();
        assert_eq!(
            t.to_tsv_string(),
            "a\tw\t0.5\na\tx\t0.25\na\ty\t0.25\nb\tz\t1\n"
        );
        let again = TranslationTable::parse_tsv(&t.to_tsv_string(), "f").unwrap();
        assert_eq!(again.to_tsv_string(), t.to_tsv_string());
    }

    #[test]
    fn over_unit_mass_rejected() {
        assert!(TranslationTable::parse_tsv("a\tx\t0.7\na\ty\t0.7\n", "f").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tsv");
        let t = TranslationTable::parse_tsv("a\tx\t0.1\na\ty\t0.3\nc\tq\t1e-7\n", "f").unwrap();
        save_table(&t, &path).unwrap();
        assert_eq!(load_table(&path).unwrap(), t);
        assert!(matches!(
            load_table(dir.path().join("nope")),
            Err(PsqError::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn tsv_round_trip(lists in prop::collection::btree_map(
            "[a-e]{1,2}",
            prop::collection::btree_map("[v-z]{1,2}", 1u32..1000, 1..5),
            0..6,
        )) {
            let table = TranslationTable::from_lists(lists.into_iter().map(|(s, m)| {
                let total: u32 = m.values().sum();
                let list = m.into_iter()
                    .map(|(t, c)| Translation::new(t, c as f64 / total as f64))
                    .collect();
                (s, list)
            })).unwrap();
            let text = table.to_tsv_string();
            let back = TranslationTable::parse_tsv(&text, "p").unwrap();
            prop_assert_eq!(&back, &table);
            prop_assert_eq!(back.to_tsv_string(), text);
        }
    }
}
