//! The refinement pipeline: ensemble, table chooser, header refiner,
//! oversegmentation pruning, grid clipping, the three structure refiners,
//! and cell-matrix construction, with a per-stage trace for audit.
//!
//! Disabled stages are identity, so the all-off configuration reproduces
//! the unrefined baseline bit for bit: the highest-confidence candidate and
//! the untouched input grid.

use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{
    BBox, CandidateTable, CellMatrix, Document, ModuleToggles, ParamSet, Source, TableGrid,
};
use crate::td::{self, ChooserOutcome, TdError};
use crate::text::HeaderDictionary;
use crate::tsr::{self, TsrError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Td(#[from] TdError),
    #[error(transparent)]
    Tsr(#[from] TsrError),
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ensemble,
    TableChooser,
    HeaderRefiner,
    Oversegmentation,
    ClipGrid,
    OverlapColumns,
    UnfuseLines,
    RemoveExtraLines,
    BuildCellMatrix,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Ensemble => "ensemble",
            Stage::TableChooser => "table_chooser",
            Stage::HeaderRefiner => "header_refiner",
            Stage::Oversegmentation => "oversegmentation",
            Stage::ClipGrid => "clip_grid",
            Stage::OverlapColumns => "overlap_columns",
            Stage::UnfuseLines => "unfuse_lines",
            Stage::RemoveExtraLines => "remove_extra_lines",
            Stage::BuildCellMatrix => "build_cell_matrix",
        }
    }
}

/// What one stage saw and produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: Stage,
    pub enabled: bool,
    pub bbox_in: Option<BBox>,
    pub bbox_out: Option<BBox>,
    pub rows_in: usize,
    pub rows_out: usize,
    pub cols_in: usize,
    pub cols_out: usize,
}

/// Refined prediction for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub bbox: BBox,
    pub grid: TableGrid,
    pub matrix: CellMatrix,
    pub trace: Vec<StageRecord>,
    /// Chooser details when the chooser stage ran.
    pub chooser: Option<ChooserOutcome>,
}

fn split_by_source(candidates: &[CandidateTable]) -> (Vec<CandidateTable>, Vec<CandidateTable>) {
    let a = candidates
        .iter()
        .filter(|c| c.source == Source::DetectorA)
        .cloned()
        .collect();
    let b = candidates
        .iter()
        .filter(|c| c.source == Source::DetectorB)
        .cloned()
        .collect();
    (a, b)
}

/// Clips a grid to a refined region. Bands are intersected with the region;
/// bands left without extent in their own axis are dropped, as are bands
/// whose start ceases to be distinct after clamping (overlapping slivers).
/// The header count follows any dropped leading header rows.
pub fn clip_grid(grid: &TableGrid, bbox: &BBox) -> TableGrid {
    let mut rows: Vec<BBox> = Vec::with_capacity(grid.rows.len());
    let mut header_rows = 0;
    for (i, row) in grid.rows.iter().enumerate() {
        let Some(clipped) = row.intersection(bbox) else {
            continue;
        };
        if clipped.height() <= 0.0 {
            continue;
        }
        if rows.last().is_some_and(|prev| !(prev.y0 < clipped.y0)) {
            continue;
        }
        if i < grid.header_rows {
            header_rows += 1;
        }
        rows.push(clipped);
    }
    let mut columns: Vec<BBox> = Vec::with_capacity(grid.columns.len());
    for col in &grid.columns {
        let Some(clipped) = col.intersection(bbox) else {
            continue;
        };
        if clipped.width() <= 0.0 {
            continue;
        }
        if columns.last().is_some_and(|prev| !(prev.x0 < clipped.x0)) {
            continue;
        }
        columns.push(clipped);
    }
    let out = TableGrid {
        table_bbox: *bbox,
        rows,
        columns,
        header_rows,
    };
    debug_assert!(out.validate().is_ok());
    out
}

/// Runs the refinement chain on one document.
///
/// Stage order: ensemble, table chooser, header refiner, oversegmentation
/// pruning, grid clip to the refined region, overlapping-column resolution,
/// row unfusing, trailing-row removal, cell-matrix construction. The grid
/// clip only happens when a region-refining stage is enabled; otherwise the
/// input grid passes through untouched. A document without a grid yields an
/// empty grid and matrix.
pub fn run_pipeline(
    doc: &Document,
    params: &ParamSet,
    toggles: &ModuleToggles,
    dict: &HeaderDictionary,
) -> Result<PipelineOutput, PipelineError> {
    let mut trace = Vec::with_capacity(9);
    let tokens = &doc.page.tokens;

    let (a, b) = split_by_source(&doc.candidates);
    let candidates = if toggles.ensemble {
        td::ensemble_candidates(&a, &b)
    } else {
        doc.candidates.clone()
    };
    trace.push(StageRecord {
        stage: Stage::Ensemble,
        enabled: toggles.ensemble,
        bbox_in: None,
        bbox_out: None,
        rows_in: doc.candidates.len(),
        rows_out: candidates.len(),
        cols_in: 0,
        cols_out: 0,
    });

    let mut chooser = None;
    let chosen = if toggles.table_chooser {
        let outcome = td::choose_table(&candidates, &doc.page, dict, params)?;
        let bbox = candidates[outcome.chosen_index].bbox;
        chooser = Some(outcome);
        bbox
    } else {
        candidates[td::highest_confidence(&candidates)?].bbox
    };
    trace.push(StageRecord {
        stage: Stage::TableChooser,
        enabled: toggles.table_chooser,
        bbox_in: None,
        bbox_out: Some(chosen),
        rows_in: candidates.len(),
        rows_out: 1,
        cols_in: 0,
        cols_out: 0,
    });

    let after_header = if toggles.header_refiner {
        td::refine_header(&chosen, &doc.page, dict, params)
    } else {
        chosen
    };
    trace.push(StageRecord {
        stage: Stage::HeaderRefiner,
        enabled: toggles.header_refiner,
        bbox_in: Some(chosen),
        bbox_out: Some(after_header),
        rows_in: 0,
        rows_out: 0,
        cols_in: 0,
        cols_out: 0,
    });

    let refined_bbox = if toggles.oversegmentation {
        td::prune_oversegmentation(&after_header, &doc.page, params)
    } else {
        after_header
    };
    trace.push(StageRecord {
        stage: Stage::Oversegmentation,
        enabled: toggles.oversegmentation,
        bbox_in: Some(after_header),
        bbox_out: Some(refined_bbox),
        rows_in: 0,
        rows_out: 0,
        cols_in: 0,
        cols_out: 0,
    });

    let input_grid = match &doc.grid {
        Some(g) => g.clone(),
        None => TableGrid {
            table_bbox: refined_bbox,
            rows: Vec::new(),
            columns: Vec::new(),
            header_rows: 0,
        },
    };

    // Clipping belongs to region refinement: with every region stage off the
    // grid must pass through bit-identical, including its own bbox.
    let clip_active = toggles.any_td() && doc.grid.is_some();
    let mut grid = if clip_active {
        clip_grid(&input_grid, &refined_bbox).map_err(|_| TsrError::EmptyGrid)?
    } else {
        input_grid.clone()
    };
    trace.push(StageRecord {
        stage: Stage::ClipGrid,
        enabled: clip_active,
        bbox_in: Some(input_grid.table_bbox),
        bbox_out: Some(grid.table_bbox),
        rows_in: input_grid.rows.len(),
        rows_out: grid.rows.len(),
        cols_in: input_grid.columns.len(),
        cols_out: grid.columns.len(),
    });

    for (stage, enabled) in [
        (Stage::OverlapColumns, toggles.overlap_columns),
        (Stage::UnfuseLines, toggles.unfuse_lines),
        (Stage::RemoveExtraLines, toggles.remove_extra_lines),
    ] {
        let before_rows = grid.rows.len();
        let before_cols = grid.columns.len();
        if enabled {
            grid = match stage {
                Stage::OverlapColumns => tsr::resolve_overlapping_columns(&grid, tokens, params),
                Stage::UnfuseLines => tsr::unfuse_lines(&grid, tokens, params),
                Stage::RemoveExtraLines => tsr::remove_extra_lines(&grid, tokens, params),
                _ => unreachable!(),
            };
        }
        trace.push(StageRecord {
            stage,
            enabled,
            bbox_in: Some(grid.table_bbox),
            bbox_out: Some(grid.table_bbox),
            rows_in: before_rows,
            rows_out: grid.rows.len(),
            cols_in: before_cols,
            cols_out: grid.columns.len(),
        });
    }

    let matrix = if grid.rows.is_empty() || grid.columns.is_empty() {
        if doc.grid.is_some() {
            return Err(TsrError::EmptyGrid.into());
        }
        CellMatrix::empty()
    } else {
        tsr::build_cell_matrix(&grid, tokens, params)?
    };
    trace.push(StageRecord {
        stage: Stage::BuildCellMatrix,
        enabled: true,
        bbox_in: Some(grid.table_bbox),
        bbox_out: Some(grid.table_bbox),
        rows_in: grid.rows.len(),
        rows_out: matrix.row_count(),
        cols_in: grid.columns.len(),
        cols_out: matrix.col_count(),
    });

    Ok(PipelineOutput {
        bbox: refined_bbox,
        grid,
        matrix,
        trace,
        chooser,
    })
}
