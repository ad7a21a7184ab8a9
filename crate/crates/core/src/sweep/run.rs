use std::time::Instant;

use serde::Serialize;

use super::grid::{GridCell, SweepGrid};
use crate::alignment::TranslationTable;
use crate::error::{PsqError, Result};
use crate::evaluation::{evaluate, Qrels, DEFAULT_RECALL_CUTOFF};
use crate::exec::Exec;
use crate::indexer::{
    index_size, DocumentVector, IndexBuilder, IndexMetadata, InvertedIndex, SmoothingConfig,
    UnigramLM, DEFAULT_CHUNK_SIZE,
};
use crate::pruning::{prune, PruningConfig, DEFAULT_TABLE_FLOOR};
use crate::search::{batch_search_with, Query, DEFAULT_DEPTH};

/// Everything a sweep cell needs besides its pruning config.
#[derive(Debug, Clone)]
pub struct SweepInputs<'a> {
    pub docs: &'a [DocumentVector],
    pub table: &'a TranslationTable,
    pub lm: &'a UnigramLM,
    pub queries: &'a [Query],
    pub qrels: &'a Qrels,
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// PMF floor applied once to the table before any cell is pruned.
    pub table_floor: f64,
    /// Upper bound on concurrently running cells; `None` uses every core.
    pub workers: Option<usize>,
    pub depth: usize,
    pub recall_cutoff: usize,
    pub chunk_size: usize,
    pub exec: Exec,
    /// Template for every cell's index trailer (tokenizers, version).
    pub metadata: IndexMetadata,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            table_floor: DEFAULT_TABLE_FLOOR,
            workers: None,
            depth: DEFAULT_DEPTH,
            recall_cutoff: DEFAULT_RECALL_CUTOFF,
            chunk_size: DEFAULT_CHUNK_SIZE,
            exec: Exec::default(),
            metadata: IndexMetadata::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub config: PruningConfig,
    pub index_bytes: u64,
    pub total_postings: u64,
    pub map: f64,
    pub r_at_100: f64,
    /// Wall-clock seconds for prune + build; informational only.
    pub build_seconds: f64,
}

impl SweepPoint {
    /// Equality ignoring the timing field.
    pub fn same_result(&self, other: &SweepPoint) -> bool {
        SweepPoint {
            build_seconds: 0.0,
            ..self.clone()
        } == SweepPoint {
            build_seconds: 0.0,
            ..other.clone()
        }
    }
}

/// Applies the table floor used by every sweep cell and standalone build.
pub fn floor_table(table: &TranslationTable, floor: f64) -> Result<TranslationTable> {
    prune(table, &PruningConfig::pmf_floor(floor)?)
}

/// Index for one pruning config over an already floored table.
pub fn build_cell_index(
    inputs: &SweepInputs<'_>,
    floored: &TranslationTable,
    alpha: f64,
    config: &PruningConfig,
    options: &SweepOptions,
) -> Result<InvertedIndex> {
    let pruned = prune(floored, config)?;
    let metadata = IndexMetadata {
        pruning: Some(*config),
        table_floor: Some(options.table_floor),
        ..options.metadata.clone()
    };
    IndexBuilder::new(&pruned, inputs.lm, SmoothingConfig::new(alpha)?)
        .chunk_size(options.chunk_size)
        .exec(options.exec)
        .metadata(metadata)
        .build_from_vectors(inputs.docs)
}

fn run_cell(
    inputs: &SweepInputs<'_>,
    floored: &TranslationTable,
    alpha: f64,
    cell: &GridCell,
    options: &SweepOptions,
) -> Result<SweepPoint> {
    let start = Instant::now();
    let index = build_cell_index(inputs, floored, alpha, &cell.config, options)?;
    let build_seconds = start.elapsed().as_secs_f64();
    let size = index_size(&index);
    let runs = batch_search_with(&index, inputs.queries, options.depth, options.exec);
    let report = evaluate(&runs, inputs.qrels, options.recall_cutoff)?;
    Ok(SweepPoint {
        config: cell.config,
        index_bytes: size.bytes,
        total_postings: size.total_postings,
        map: report.map,
        r_at_100: report.recall,
        build_seconds,
    })
}

/// Builds, sizes and evaluates one index per grid cell. Points come back in
/// grid order regardless of scheduling; the first failing cell aborts the
/// sweep and is named in the error.
pub fn run_sweep(
    inputs: &SweepInputs<'_>,
    grid: &SweepGrid,
    options: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    let cells = grid.cells()?;
    if options.depth == 0 || options.recall_cutoff == 0 {
        return Err(PsqError::InvalidConfig(
            "depth and recall cutoff must be positive".into(),
        ));
    }
    let floored = floor_table(inputs.table, options.table_floor)?;
    options.exec.install(options.workers, || {
        options.exec.try_map(&cells, |cell| {
            run_cell(inputs, &floored, grid.alpha, cell, options).map_err(|e| PsqError::SweepCell {
                cell: cell.config.to_string(),
                source: Box::new(e),
            })
        })
    })
}
