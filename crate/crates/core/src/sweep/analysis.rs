use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::grid::SweepGrid;
use super::pareto::{frontier_gap, pareto_frontier, FrontierGap, Metric, ParetoResult, SizeAxis};
use super::run::SweepPoint;
use crate::error::{PsqError, Result};
use crate::pruning::TopK;

pub const POINTS_HEADER: &str =
    "pmf,cdf,topk,renormalize,index_bytes,total_postings,map,r_at_100,build_seconds";

fn csv_row(p: &SweepPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        p.config.pmf_min,
        p.config.cdf_max,
        p.config.top_k,
        p.config.renormalize,
        p.index_bytes,
        p.total_postings,
        p.map,
        p.r_at_100,
        p.build_seconds
    )
}

pub fn points_csv<'a>(points: impl IntoIterator<Item = &'a SweepPoint>) -> String {
    let mut out = String::from(POINTS_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&csv_row(p));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Knob {
    Pmf,
    TopK,
    Cdf,
}

impl Knob {
    fn name(self) -> &'static str {
        match self {
            Knob::Pmf => "pmf",
            Knob::TopK => "topk",
            Knob::Cdf => "cdf",
        }
    }

    fn labels(self, grid: &SweepGrid) -> Vec<String> {
        match self {
            Knob::Pmf => grid.pmf.iter().map(f64::to_string).collect(),
            Knob::TopK => grid.topk.iter().map(TopK::to_string).collect(),
            Knob::Cdf => grid.cdf.iter().map(f64::to_string).collect(),
        }
    }

    fn position(self, grid: &SweepGrid, p: &SweepPoint) -> Option<usize> {
        match self {
            Knob::Pmf => grid.pmf.iter().position(|&v| v == p.config.pmf_min),
            Knob::TopK => grid.topk.iter().position(|&v| v == p.config.top_k),
            Knob::Cdf => grid.cdf.iter().position(|&v| v == p.config.cdf_max),
        }
    }

    /// Grid position of the least restrictive value on this knob.
    fn loosest(self, grid: &SweepGrid) -> usize {
        let argbest = |v: &[f64], max: bool| {
            (0..v.len())
                .reduce(|a, b| {
                    if (v[b] > v[a]) == max && v[b] != v[a] {
                        b
                    } else {
                        a
                    }
                })
                .unwrap_or(0)
        };
        match self {
            Knob::Pmf => argbest(&grid.pmf, false),
            Knob::Cdf => argbest(&grid.cdf, true),
            Knob::TopK => (0..grid.topk.len())
                .reduce(|a, b| if grid.topk[b] > grid.topk[a] { b } else { a })
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Stat {
    Map,
    RAt100,
    Bytes,
    Postings,
}

impl Stat {
    const ALL: [Stat; 4] = [Stat::Map, Stat::RAt100, Stat::Bytes, Stat::Postings];

    fn name(self) -> &'static str {
        match self {
            Stat::Map => "map",
            Stat::RAt100 => "r_at_100",
            Stat::Bytes => "index_bytes",
            Stat::Postings => "total_postings",
        }
    }

    fn value(self, p: &SweepPoint) -> String {
        match self {
            Stat::Map => p.map.to_string(),
            Stat::RAt100 => p.r_at_100.to_string(),
            Stat::Bytes => p.index_bytes.to_string(),
            Stat::Postings => p.total_postings.to_string(),
        }
    }
}

/// Pivot of one statistic over two knobs, the third held at its loosest
/// grid value. Rows follow `rows` in grid order, columns `cols`. Cells with
/// no matching point read `NA`.
fn heatmap(points: &[SweepPoint], grid: &SweepGrid, rows: Knob, cols: Knob, stat: Stat) -> String {
    let fixed = [Knob::Pmf, Knob::TopK, Knob::Cdf]
        .into_iter()
        .find(|k| *k != rows && *k != cols)
        .expect("two of three knobs");
    let fixed_at = fixed.loosest(grid);
    let (rl, cl) = (rows.labels(grid), cols.labels(grid));
    let mut cells = vec![vec!["NA".to_string(); cl.len()]; rl.len()];
    for p in points {
        if fixed.position(grid, p) != Some(fixed_at) {
            continue;
        }
        if let (Some(r), Some(c)) = (rows.position(grid, p), cols.position(grid, p)) {
            cells[r][c] = stat.value(p);
        }
    }
    let mut out = format!("{}\\{}", rows.name(), cols.name());
    for c in &cl {
        let _ = write!(out, "\t{c}");
    }
    out.push('\n');
    for (label, row) in rl.iter().zip(cells) {
        out.push_str(label);
        for v in row {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

fn series(points: &[SweepPoint], idx: &[usize], metric: Metric, size: SizeAxis) -> String {
    let mut out = format!("{}\t{}\tpmf\tcdf\ttopk\n", size.name(), metric.name());
    for &i in idx {
        let p = &points[i];
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            size.of(p),
            metric.of(p),
            p.config.pmf_min,
            p.config.cdf_max,
            p.config.top_k
        );
    }
    out
}

/// Frontier of the full grid against the frontier restricted to cells
/// without a CDF cutoff (cdf = 1.0).
#[derive(Debug, Clone, Serialize)]
pub struct CdfComparison {
    pub full_frontier: usize,
    pub no_cdf_points: usize,
    pub no_cdf_frontier: usize,
    pub gap: FrontierGap,
}

pub fn compare_without_cdf(
    points: &[SweepPoint],
    metric: Metric,
    size: SizeAxis,
) -> Option<(CdfComparison, Vec<usize>)> {
    let full = pareto_frontier(points, metric, size);
    let sub: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].config.cdf_max >= 1.0)
        .collect();
    if sub.is_empty() {
        return None;
    }
    let sub_points: Vec<SweepPoint> = sub.iter().map(|&i| points[i].clone()).collect();
    let sub_front = pareto_frontier(&sub_points, metric, size);
    let pair = |p: &SweepPoint| (size.of(p), metric.of(p));
    let reference: Vec<(u64, f64)> = full.frontier.iter().map(|&i| pair(&points[i])).collect();
    let restricted: Vec<(u64, f64)> = sub_front
        .frontier
        .iter()
        .map(|&i| pair(&sub_points[i]))
        .collect();
    let cmp = CdfComparison {
        full_frontier: full.frontier.len(),
        no_cdf_points: sub.len(),
        no_cdf_frontier: sub_front.frontier.len(),
        gap: frontier_gap(&reference, &restricted),
    };
    Some((cmp, sub_front.frontier.iter().map(|&i| sub[i]).collect()))
}

#[derive(Debug, Clone, Serialize)]
struct Summary<'a> {
    points: usize,
    metric: Metric,
    size_axis: SizeAxis,
    frontier: usize,
    without_cdf: Option<&'a CdfComparison>,
}

/// Writes `points.csv`, `frontier.csv`, the per-knob-pair heatmaps, frontier
/// series for plotting, and `summary.json`. Returns the written paths.
pub fn emit_analysis(
    points: &[SweepPoint],
    grid: &SweepGrid,
    frontier: &ParetoResult,
    metric: Metric,
    size: SizeAxis,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| PsqError::io(dir, e))?;
    let mut files: Vec<(String, String)> = vec![
        ("points.csv".into(), points_csv(points)),
        (
            "frontier.csv".into(),
            points_csv(frontier.frontier.iter().map(|&i| &points[i])),
        ),
        (
            "frontier_series.tsv".into(),
            series(points, &frontier.frontier, metric, size),
        ),
    ];
    for (rows, cols) in [
        (Knob::Pmf, Knob::TopK),
        (Knob::Pmf, Knob::Cdf),
        (Knob::TopK, Knob::Cdf),
    ] {
        for stat in Stat::ALL {
            files.push((
                format!(
                    "heatmap_{}_{}_{}.tsv",
                    rows.name(),
                    cols.name(),
                    stat.name()
                ),
                heatmap(points, grid, rows, cols, stat),
            ));
        }
    }
    let comparison = compare_without_cdf(points, metric, size);
    if let Some((_, sub_frontier)) = &comparison {
        files.push((
            "frontier_no_cdf_series.tsv".into(),
            series(points, sub_frontier, metric, size),
        ));
    }
    let summary = Summary {
        points: points.len(),
        metric,
        size_axis: size,
        frontier: frontier.frontier.len(),
        without_cdf: comparison.as_ref().map(|(c, _)| c),
    };
    files.push((
        "summary.json".into(),
        serde_json::to_string_pretty(&summary)? + "\n",
    ));

    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| PsqError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
