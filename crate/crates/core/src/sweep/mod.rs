//! Pruning-grid sweeps and efficiency/effectiveness analysis.

mod analysis;
mod grid;
mod pareto;
mod run;

pub use analysis::{compare_without_cdf, emit_analysis, points_csv, CdfComparison, POINTS_HEADER};
pub use grid::{GridCell, SweepGrid};
pub use pareto::{
    frontier_gap, pareto_frontier, pareto_indices, FrontierGap, Metric, ParetoResult, SizeAxis,
};
pub use run::{build_cell_index, floor_table, run_sweep, SweepInputs, SweepOptions, SweepPoint};
