//! Translation-table pruning by PMF floor, CDF cutoff and top-k cap.
//!
//! Each criterion selects a prefix of a source token's descending-sorted
//! translation list, so combining them is just taking the shortest prefix.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::alignment::{Translation, TranslationTable};
use crate::error::{PsqError, Result};

/// Probability floor applied once to a table before any sweep or index build.
pub const DEFAULT_TABLE_FLOOR: f64 = 1e-6;

/// Upper bound on translations kept per source token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TopK {
    Limit(usize),
    Unbounded,
}

impl TopK {
    pub fn limit(self) -> usize {
        match self {
            TopK::Limit(k) => k,
            TopK::Unbounded => usize::MAX,
        }
    }
}

impl fmt::Display for TopK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopK::Limit(k) => write!(f, "{k}"),
            TopK::Unbounded => f.write_str("inf"),
        }
    }
}

impl FromStr for TopK {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "unbounded" => Ok(TopK::Unbounded),
            other => match other.parse::<usize>() {
                Ok(0) => Err("top-k must be at least 1".into()),
                Ok(k) => Ok(TopK::Limit(k)),
                Err(_) => Err(format!(
                    "top-k {other:?} is neither a positive integer nor \"inf\""
                )),
            },
        }
    }
}

impl Serialize for TopK {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TopK::Limit(k) => s.serialize_u64(*k as u64),
            TopK::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for TopK {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(0) => Err(serde::de::Error::custom("top-k must be at least 1")),
            Raw::Int(k) => Ok(TopK::Limit(k as usize)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruningConfig {
    pub pmf_min: f64,
    pub cdf_max: f64,
    pub top_k: TopK,
    pub renormalize: bool,
}

impl Default for PruningConfig {
    fn default() -> Self {
        Self::identity()
    }
}

impl PruningConfig {
    /// Keeps everything.
    pub fn identity() -> Self {
        PruningConfig {
            pmf_min: 0.0,
            cdf_max: 1.0,
            top_k: TopK::Unbounded,
            renormalize: false,
        }
    }

    pub fn new(pmf_min: f64, cdf_max: f64, top_k: TopK, renormalize: bool) -> Result<Self> {
        let cfg = PruningConfig {
            pmf_min,
            cdf_max,
            top_k,
            renormalize,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pmf_floor(pmf_min: f64) -> Result<Self> {
        Self::new(pmf_min, 1.0, TopK::Unbounded, false)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pmf_min) {
            return Err(PsqError::InvalidConfig(format!(
                "pmf_min {} outside [0, 1]",
                self.pmf_min
            )));
        }
        if !(self.cdf_max > 0.0 && self.cdf_max <= 1.0) {
            return Err(PsqError::InvalidConfig(format!(
                "cdf_max {} outside (0, 1]",
                self.cdf_max
            )));
        }
        if self.top_k == TopK::Limit(0) {
            return Err(PsqError::InvalidConfig("top_k must be at least 1".into()));
        }
        Ok(())
    }

    /// The tightest of both configs on every knob.
    pub fn combine(&self, other: &PruningConfig) -> PruningConfig {
        PruningConfig {
            pmf_min: self.pmf_min.max(other.pmf_min),
            cdf_max: self.cdf_max.min(other.cdf_max),
            top_k: self.top_k.min(other.top_k),
            renormalize: self.renormalize || other.renormalize,
        }
    }

    /// Length of the prefix of a descending-sorted list that survives.
    pub fn kept_len(&self, list: &[Translation]) -> usize {
        let by_pmf = list.partition_point(|t| t.prob >= self.pmf_min);
        let by_topk = self.top_k.limit();
        let by_cdf = if self.cdf_max >= 1.0 {
            // Rounding can push a full list's running sum past 1 early.
            list.len()
        } else {
            let mut acc = 0.0;
            list.iter()
                .position(|t| {
                    acc += t.prob;
                    acc >= self.cdf_max
                })
                .map_or(list.len(), |i| i + 1)
        };
        by_pmf.min(by_topk).min(by_cdf)
    }
}

impl fmt::Display for PruningConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pmf={} cdf={} topk={}{}",
            self.pmf_min,
            self.cdf_max,
            self.top_k,
            if self.renormalize { " renorm" } else { "" }
        )
    }
}

pub fn prune(table: &TranslationTable, cfg: &PruningConfig) -> Result<TranslationTable> {
    cfg.validate()?;
    let mut entries = BTreeMap::new();
    for (source, list) in table.iter() {
        let len = cfg.kept_len(list);
        if len == 0 {
            continue;
        }
        let mut kept = list[..len].to_vec();
        if cfg.renormalize {
            let total: f64 = kept.iter().map(|t| t.prob).sum();
            for t in &mut kept {
                t.prob /= total;
            }
        }
        entries.insert(source.to_owned(), kept);
    }
    Ok(TranslationTable::from_sorted_unchecked(entries))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSummary {
    pub sources: usize,
    pub entries: usize,
    pub mean_translations: f64,
    pub max_translations: usize,
    pub total_mass: f64,
}

impl TableSummary {
    pub fn of(table: &TranslationTable) -> Self {
        let sources = table.num_sources();
        let entries = table.num_entries();
        TableSummary {
            sources,
            entries,
            mean_translations: if sources == 0 {
                0.0
            } else {
                entries as f64 / sources as f64
            },
            max_translations: table.iter().map(|(_, l)| l.len()).max().unwrap_or(0),
            total_mass: table.iter().flat_map(|(_, l)| l).map(|t| t.prob).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneReport {
    pub before: TableSummary,
    pub after: TableSummary,
    /// Fraction of the original probability mass whose entries survived,
    /// measured with the original (pre-renormalization) probabilities.
    pub retained_mass: f64,
}

pub fn prune_stats(before: &TranslationTable, after: &TranslationTable) -> PruneReport {
    let before_summary = TableSummary::of(before);
    let kept: f64 = after
        .iter()
        .flat_map(|(s, l)| l.iter().map(move |t| before.prob(s, &t.target)))
        .sum();
    PruneReport {
        retained_mass: if before_summary.total_mass > 0.0 {
            kept / before_summary.total_mass
        } else {
            1.0
        },
        after: TableSummary::of(after),
        before: before_summary,
    }
}
