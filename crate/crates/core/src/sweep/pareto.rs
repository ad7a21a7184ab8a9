use serde::{Deserialize, Serialize};

use super::SweepPoint;

/// Effectiveness measure maximized on the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Map,
    #[default]
    #[serde(rename = "r_at_100")]
    RAt100,
}

/// Size measure minimized on the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeAxis {
    #[default]
    Bytes,
    Postings,
}

impl Metric {
    pub fn of(self, p: &SweepPoint) -> f64 {
        match self {
            Metric::Map => p.map,
            Metric::RAt100 => p.r_at_100,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Map => "map",
            Metric::RAt100 => "r_at_100",
        }
    }
}

impl SizeAxis {
    pub fn of(self, p: &SweepPoint) -> u64 {
        match self {
            SizeAxis::Bytes => p.index_bytes,
            SizeAxis::Postings => p.total_postings,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizeAxis::Bytes => "index_bytes",
            SizeAxis::Postings => "total_postings",
        }
    }
}

/// Indices into the input points: the non-dominated set, ordered by size
/// ascending (then metric descending, then input order), and the rest in
/// input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoResult {
    pub frontier: Vec<usize>,
    pub dominated: Vec<usize>,
}

/// Non-dominated set of (size, metric) pairs, minimizing size and
/// maximizing metric. A point is dominated when another is no larger and no
/// worse with at least one strict inequality; exact duplicates both stay.
pub fn pareto_indices(points: &[(u64, f64)]) -> ParetoResult {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .cmp(&points[b].0)
            .then(points[b].1.total_cmp(&points[a].1))
            .then(a.cmp(&b))
    });
    let mut on_frontier = vec![false; points.len()];
    let mut frontier = Vec::new();
    // Best metric among strictly smaller sizes.
    let mut best_smaller = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        let size = points[order[i]].0;
        let group_best = points[order[i]].1;
        let mut j = i;
        while j < order.len() && points[order[j]].0 == size {
            let k = order[j];
            if points[k].1 == group_best && group_best > best_smaller {
                on_frontier[k] = true;
                frontier.push(k);
            }
            j += 1;
        }
        best_smaller = best_smaller.max(group_best);
        i = j;
    }
    let dominated = (0..points.len()).filter(|&k| !on_frontier[k]).collect();
    ParetoResult {
        frontier,
        dominated,
    }
}

pub fn pareto_frontier(points: &[SweepPoint], metric: Metric, size: SizeAxis) -> ParetoResult {
    let pairs: Vec<(u64, f64)> = points.iter().map(|p| (size.of(p), metric.of(p))).collect();
    pareto_indices(&pairs)
}

/// How far a restricted frontier falls below a reference frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierGap {
    /// Largest `reference − best restricted metric within the same size
    /// budget` over reference frontier points that have a restricted point
    /// within budget.
    pub max_gap: f64,
    pub max_gap_size: Option<u64>,
    pub matched: usize,
    /// Reference frontier points smaller than every restricted point.
    pub unmatched: usize,
}

/// Compares each reference point to the best restricted point with size no
/// larger than the reference point's size.
pub fn frontier_gap(reference: &[(u64, f64)], restricted: &[(u64, f64)]) -> FrontierGap {
    let mut sorted: Vec<(u64, f64)> = restricted.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
    // prefix maxima of metric by size
    let mut best = Vec::with_capacity(sorted.len());
    let mut run = f64::NEG_INFINITY;
    for &(_, m) in &sorted {
        run = run.max(m);
        best.push(run);
    }
    let mut gap = FrontierGap {
        max_gap: 0.0,
        max_gap_size: None,
        matched: 0,
        unmatched: 0,
    };
    for &(size, metric) in reference {
        let n = sorted.partition_point(|p| p.0 <= size);
        if n == 0 {
            gap.unmatched += 1;
            continue;
        }
        gap.matched += 1;
        let g = metric - best[n - 1];
        if gap.max_gap_size.is_none() || g > gap.max_gap {
            gap.max_gap = g;
            gap.max_gap_size = Some(size);
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_domination() {
        let r = pareto_indices(&[(10, 0.5), (20, 0.4)]);
        assert_eq!(r.frontier, [0]);
        assert_eq!(r.dominated, [1]);
    }

    #[test]
    fn incomparable_pair() {
        let r = pareto_indices(&[(20, 0.6), (10, 0.5)]);
        assert_eq!(r.frontier, [1, 0]);
        assert!(r.dominated.is_empty());
    }

    #[test]
    fn ties() {
        // exact duplicates both stay; equal size lower metric is dominated;
        // equal metric larger size is dominated
        let r = pareto_indices(&[(10, 0.5), (10, 0.5), (10, 0.4), (15, 0.5), (5, 0.1)]);
        assert_eq!(r.frontier, [4, 0, 1]);
        assert_eq!(r.dominated, [2, 3]);
        assert_eq!(pareto_indices(&[]).frontier, Vec::<usize>::new());
    }

    #[test]
    fn gap() {
        let reference = [(10, 0.5), (20, 0.7), (30, 0.8)];
        let restricted = [(12, 0.45), (20, 0.6), (40, 0.8)];
        let g = frontier_gap(&reference, &restricted);
        assert_eq!((g.matched, g.unmatched), (2, 1));
        assert!((g.max_gap - 0.2).abs() < 1e-12);
        assert_eq!(g.max_gap_size, Some(30));
        let same = frontier_gap(&reference, &reference);
        assert_eq!(same.max_gap, 0.0);
    }
}
