//! Table-structure refinement: overlapping-column resolution, row
//! unfusing, trailing-row removal, and final cell-matrix construction.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

use crate::geometry::{build_cells, iou, GeometryError};
use crate::model::{BBox, CellMatrix, ParamSet, TableGrid, Token};
use crate::text::{classify_token, TokenClass};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TsrError {
    #[error("grid has no rows or no columns")]
    EmptyGrid,
}

impl From<GeometryError> for TsrError {
    fn from(_: GeometryError) -> Self {
        TsrError::EmptyGrid
    }
}

/// A horizontal cut applied to one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSplit {
    pub row_index: usize,
    /// Cut line, strictly inside the row's vertical extent.
    pub split_y: f64,
}

fn center_in(t: &Token, b: &BBox) -> bool {
    let (cx, cy) = t.center();
    b.contains_point(cx, cy)
}

/// Tokens whose centers land in the leading header rows of a column.
fn header_token_count(grid: &TableGrid, col: &BBox, tokens: &[Token]) -> usize {
    let Some(band) = grid.header_band() else {
        return 0;
    };
    tokens
        .iter()
        .filter(|t| center_in(t, col) && center_in(t, &band))
        .count()
}

/// Repeatedly collapses the worst-overlapping column pair until no pair
/// exceeds `theta_iou`. The column with fewer header tokens is dropped;
/// ties keep the wider column, then the leftmost. Terminates because every
/// step removes one column, and the survivors keep their x-order.
pub fn resolve_overlapping_columns(
    grid: &TableGrid,
    tokens: &[Token],
    params: &ParamSet,
) -> TableGrid {
    let mut columns = grid.columns.clone();
    loop {
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..columns.len() {
            for j in (i + 1)..columns.len() {
                let v = iou(&columns[i], &columns[j]);
                if v > params.theta_iou && worst.is_none_or(|(_, _, w)| v > w) {
                    worst = Some((i, j, v));
                }
            }
        }
        let Some((i, j, _)) = worst else {
            break;
        };
        let probe = TableGrid {
            columns: columns.clone(),
            ..grid.clone()
        };
        let hi = header_token_count(&probe, &columns[i], tokens);
        let hj = header_token_count(&probe, &columns[j], tokens);
        let wi = columns[i].width();
        let wj = columns[j].width();
        // Drop the loser: fewer header tokens, then narrower, then rightmost.
        let drop = if hi != hj {
            if hi < hj {
                i
            } else {
                j
            }
        } else if wi != wj {
            if wi < wj {
                i
            } else {
                j
            }
        } else {
            j
        };
        columns.remove(drop);
    }
    TableGrid {
        columns,
        ..grid.clone()
    }
}

fn median_token_height(tokens: &[Token], region: &BBox) -> f64 {
    let mut hs: Vec<f64> = tokens
        .iter()
        .filter(|t| center_in(t, region))
        .map(|t| t.bbox.height())
        .collect();
    if hs.is_empty() {
        return 0.0;
    }
    hs.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    hs[hs.len() / 2]
}

/// Stacked groups of amount tokens in one cell, by y-center. Gaps wider
/// than half the median token height start a new band.
fn amount_bands(cell: &BBox, tokens: &[Token], half_median: f64) -> Vec<Vec<f64>> {
    let mut centers: Vec<f64> = tokens
        .iter()
        .filter(|t| center_in(t, cell))
        .filter(|t| classify_token(&t.text) == Ok(TokenClass::Amount))
        .map(|t| t.center().1)
        .collect();
    centers.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    let mut bands: Vec<Vec<f64>> = Vec::new();
    for c in centers {
        match bands.last_mut() {
            Some(band) if c - *band.last().expect("non-empty band") <= half_median => {
                band.push(c)
            }
            _ => bands.push(alloc::vec![c]),
        }
    }
    bands
}

/// Cuts computed by the unfuse pass, exposed separately for inspection.
///
/// A body row is split when any of its cells holds at least
/// `amount_min_count` amount tokens spread over two or more vertical bands;
/// the cuts sit at the midpoints between consecutive bands of the cell with
/// the most bands (leftmost wins ties).
pub fn find_row_splits(grid: &TableGrid, tokens: &[Token], params: &ParamSet) -> Vec<RowSplit> {
    let half_median = median_token_height(tokens, &grid.table_bbox) / 2.0;
    if half_median <= 0.0 {
        return Vec::new();
    }
    let mut splits = Vec::new();
    for (ri, row) in grid.rows.iter().enumerate().skip(grid.header_rows) {
        let mut best: Option<Vec<Vec<f64>>> = None;
        for col in &grid.columns {
            let Some(cell) = row.intersection(col) else {
                continue;
            };
            let bands = amount_bands(&cell, tokens, half_median);
            let amounts: usize = bands.iter().map(Vec::len).sum();
            if amounts >= params.amount_min_count
                && bands.len() >= 2
                && best.as_ref().is_none_or(|b| bands.len() > b.len())
            {
                best = Some(bands);
            }
        }
        if let Some(bands) = best {
            for pair in bands.windows(2) {
                let below = pair[0].last().expect("non-empty band");
                let above = pair[1].first().expect("non-empty band");
                let split_y = (below + above) / 2.0;
                if row.y0 < split_y && split_y < row.y1 {
                    splits.push(RowSplit {
                        row_index: ri,
                        split_y,
                    });
                }
            }
        }
    }
    splits
}

/// Splits body rows that fused several physical lines, detected by stacked
/// amount tokens inside a single cell. Every cell of a split row is cut at
/// the same heights, and the new rows inherit the column structure.
pub fn unfuse_lines(grid: &TableGrid, tokens: &[Token], params: &ParamSet) -> TableGrid {
    let splits = find_row_splits(grid, tokens, params);
    if splits.is_empty() {
        return grid.clone();
    }
    let mut by_row: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in splits {
        by_row.entry(s.row_index).or_default().push(s.split_y);
    }
    let mut rows = Vec::with_capacity(grid.rows.len());
    for (ri, row) in grid.rows.iter().enumerate() {
        match by_row.get(&ri) {
            Some(cuts) => {
                let mut y = row.y0;
                for &cut in cuts {
                    rows.push(BBox { y0: y, y1: cut, ..*row });
                    y = cut;
                }
                rows.push(BBox { y0: y, ..*row });
            }
            None => rows.push(*row),
        }
    }
    TableGrid {
        rows,
        ..grid.clone()
    }
}

fn dominant_class(cell: &BBox, tokens: &[Token]) -> Option<TokenClass> {
    let mut counts: BTreeMap<TokenClass, usize> = BTreeMap::new();
    for t in tokens.iter().filter(|t| center_in(t, cell)) {
        if let Ok(class) = classify_token(&t.text) {
            *counts.entry(class).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(class, _)| class)
}

/// Majority class of a column over the given body rows, skipping empty cells.
fn column_majority(
    col: &BBox,
    rows: &[BBox],
    tokens: &[Token],
) -> Option<TokenClass> {
    let mut counts: BTreeMap<TokenClass, usize> = BTreeMap::new();
    for row in rows {
        let Some(cell) = row.intersection(col) else {
            continue;
        };
        if let Some(class) = dominant_class(&cell, tokens) {
            *counts.entry(class).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(class, _)| class)
}

/// Body rows needed before the type-similarity check activates; a majority
/// over fewer rows is meaningless.
const TYPE_CHECK_MIN_BODY_ROWS: usize = 3;

/// Strips non-conforming rows from the bottom of the table.
///
/// Scanning body rows bottom-up, a row is dropped when (a) too many of its
/// tokens sit outside every column's x-span, (b) most of its cells disagree
/// with their column's majority content type, or (c) the gap to the row
/// above exceeds `beta` times the largest row height. The scan stops at the
/// first surviving row, and header rows are never removed.
pub fn remove_extra_lines(grid: &TableGrid, tokens: &[Token], params: &ParamSet) -> TableGrid {
    if grid.rows.len() <= grid.header_rows {
        return grid.clone();
    }
    let max_row_height = grid
        .rows
        .iter()
        .map(|r| r.height())
        .fold(0.0, f64::max);
    let mut rows = grid.rows.clone();
    while rows.len() > grid.header_rows {
        let i = rows.len() - 1;
        let row = rows[i];
        let body = &rows[grid.header_rows..];
        let in_row: Vec<&Token> = tokens.iter().filter(|t| center_in(t, &row)).collect();

        let misaligned = if in_row.is_empty() {
            false
        } else {
            let outside = in_row
                .iter()
                .filter(|t| {
                    let cx = t.center().0;
                    !grid.columns.iter().any(|c| c.x0 <= cx && cx <= c.x1)
                })
                .count();
            outside as f64 / in_row.len() as f64 > params.misalign_fraction
        };

        let type_mismatch = if body.len() >= TYPE_CHECK_MIN_BODY_ROWS && !grid.columns.is_empty() {
            let others: Vec<BBox> = body[..body.len() - 1].to_vec();
            let mismatches = grid
                .columns
                .iter()
                .filter(|col| {
                    let Some(cell) = row.intersection(col) else {
                        return false;
                    };
                    match (dominant_class(&cell, tokens), column_majority(col, &others, tokens)) {
                        (Some(d), Some(m)) => d != m,
                        _ => false,
                    }
                })
                .count();
            mismatches as f64 > grid.columns.len() as f64 / 2.0
        } else {
            false
        };

        let gap_too_wide = if i > 0 {
            let gap = row.y0 - rows[i - 1].y1;
            max_row_height > 0.0 && gap > params.beta * max_row_height
        } else {
            false
        };

        if misaligned || type_mismatch || gap_too_wide {
            rows.pop();
        } else {
            break;
        }
    }
    TableGrid {
        rows,
        ..grid.clone()
    }
}

/// Builds the cell text matrix for a grid.
///
/// Every token whose center lies in the table bbox is assigned to exactly
/// one cell: the cell with the largest token-overlap ratio when that ratio
/// clears `token_assign_overlap`, otherwise the cell with the nearest
/// center. Cell text joins member tokens with single spaces in reading
/// order (y, then x).
pub fn build_cell_matrix(
    grid: &TableGrid,
    tokens: &[Token],
    params: &ParamSet,
) -> Result<CellMatrix, TsrError> {
    let cells = build_cells(grid)?;
    let n_rows = cells.len();
    let n_cols = cells[0].len();
    let mut members: Vec<Vec<Vec<&Token>>> =
        alloc::vec![alloc::vec![Vec::new(); n_cols]; n_rows];
    for t in tokens.iter().filter(|t| center_in(t, &grid.table_bbox)) {
        let own = t.bbox.area();
        let mut best_ratio = 0.0;
        let mut best_cell = None;
        for row in &cells {
            for cell in row {
                let ratio = if own > 0.0 {
                    t.bbox.intersection_area(&cell.bbox) / own
                } else {
                    0.0
                };
                if ratio > best_ratio {
                    best_ratio = ratio;
                    best_cell = Some((cell.row_index, cell.col_index));
                }
            }
        }
        let (ri, ci) = match best_cell {
            Some(cell) if best_ratio >= params.token_assign_overlap => cell,
            _ => nearest_cell(&cells, t),
        };
        members[ri][ci].push(t);
    }
    let mut out: Vec<Vec<String>> = Vec::with_capacity(n_rows);
    for row in &mut members {
        let mut texts = Vec::with_capacity(n_cols);
        for cell in row {
            cell.sort_by(|a, b| {
                let ka = (a.center().1, a.center().0, a.id);
                let kb = (b.center().1, b.center().0, b.id);
                ka.partial_cmp(&kb).expect("finite coordinates")
            });
            let mut text = String::new();
            for (i, t) in cell.iter().enumerate() {
                if i > 0 {
                    text.push(' ');
                }
                text.push_str(t.text.trim());
            }
            texts.push(text);
        }
        out.push(texts);
    }
    Ok(CellMatrix {
        cells: out,
        header_rows: grid.header_rows.min(n_rows),
    })
}

fn nearest_cell(cells: &[Vec<crate::geometry::CellRegion>], t: &Token) -> (usize, usize) {
    let (tx, ty) = t.center();
    let mut best = (0, 0);
    let mut best_d = f64::INFINITY;
    for row in cells {
        for cell in row {
            let (cx, cy) = cell.bbox.center();
            let d = (tx - cx) * (tx - cx) + (ty - cy) * (ty - cy);
            if d < best_d {
                best_d = d;
                best = (cell.row_index, cell.col_index);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn tok(id: u64, text: &str, x: f64, y: f64) -> Token {
        let w = text.len() as f64 * 8.0;
        Token::new(id, text.to_string(), bb(x, y, x + w, y + 12.0)).unwrap()
    }

    /// 1 header + 3 body rows, 3 columns (description, qty, amount).
    fn sample_grid() -> (TableGrid, Vec<Token>) {
        let table = bb(80.0, 300.0, 700.0, 420.0);
        let rows = vec![
            bb(80.0, 300.0, 700.0, 325.0),
            bb(80.0, 325.0, 700.0, 355.0),
            bb(80.0, 355.0, 700.0, 385.0),
            bb(80.0, 385.0, 700.0, 420.0),
        ];
        let cols = vec![
            bb(80.0, 300.0, 420.0, 420.0),
            bb(440.0, 300.0, 540.0, 420.0),
            bb(560.0, 300.0, 700.0, 420.0),
        ];
        let grid = TableGrid::new(table, rows, cols, 1).unwrap();
        let mut tokens = Vec::new();
        let mut id = 0;
        let mut push = |text: &str, x: f64, y: f64, tokens: &mut Vec<Token>| {
            tokens.push(tok(id, text, x, y));
            id += 1;
        };
        push("Description", 85.0, 305.0, &mut tokens);
        push("Qty", 445.0, 305.0, &mut tokens);
        push("Amount", 565.0, 305.0, &mut tokens);
        for (r, (desc, qty, amt)) in [
            ("Walnut", "4", "12.50"),
            ("Cobalt", "2", "8.00"),
            ("Marble", "7", "31.25"),
        ]
        .iter()
        .enumerate()
        {
            let y = 332.0 + r as f64 * 30.0;
            push(desc, 85.0, y, &mut tokens);
            push(qty, 445.0, y, &mut tokens);
            push(amt, 565.0, y, &mut tokens);
        }
        (grid, tokens)
    }

    #[test]
    fn overlap_resolution_keeps_header_bearing_column() {
        let (grid, tokens) = sample_grid();
        // Duplicate of the amount column, shifted right so the pair's IoU
        // is about 0.5; the shifted copy no longer covers the header token.
        let mut cols = grid.columns.clone();
        cols.push(bb(606.0, 300.0, 746.0, 420.0));
        cols.sort_by(|a, b| a.x0.partial_cmp(&b.x0).unwrap());
        let table = bb(80.0, 300.0, 746.0, 420.0);
        let noisy = TableGrid::new(table, grid.rows.clone(), cols, 1).unwrap();
        let params = ParamSet::default();
        let out = resolve_overlapping_columns(&noisy, &tokens, &params);
        assert_eq!(out.columns.len(), 3);
        assert!(out.columns.contains(&bb(560.0, 300.0, 700.0, 420.0)));
        for i in 0..out.columns.len() {
            for j in (i + 1)..out.columns.len() {
                assert!(iou(&out.columns[i], &out.columns[j]) <= params.theta_iou);
            }
        }
    }

    #[test]
    fn overlap_resolution_identity_below_threshold() {
        let (grid, tokens) = sample_grid();
        let out = resolve_overlapping_columns(&grid, &tokens, &ParamSet::default());
        assert_eq!(out, grid);
    }

    #[test]
    fn overlap_resolution_tie_keeps_wider_then_leftmost() {
        let table = bb(0.0, 0.0, 200.0, 100.0);
        let rows = vec![bb(0.0, 0.0, 200.0, 100.0)];
        // No header rows: all header counts are zero, so ties decide.
        let narrow = bb(40.0, 0.0, 80.0, 100.0);
        let wide = bb(0.0, 0.0, 80.0, 100.0);
        let grid = TableGrid::new(table, rows, vec![wide, narrow], 0).unwrap();
        let out = resolve_overlapping_columns(&grid, &[], &ParamSet::default());
        assert_eq!(out.columns, vec![wide]);
    }

    #[test]
    fn unfuse_splits_stacked_amounts_at_midpoint() {
        // One body row of height 40 holding two stacked amounts in the
        // price cell, centered at y = 10 and y = 30.
        let table = bb(0.0, 0.0, 300.0, 40.0);
        let rows = vec![bb(0.0, 0.0, 300.0, 40.0)];
        let cols = vec![bb(0.0, 0.0, 150.0, 40.0), bb(160.0, 0.0, 300.0, 40.0)];
        let grid = TableGrid::new(table, rows, cols, 0).unwrap();
        let tokens = vec![
            tok(0, "Walnut", 10.0, 4.0),
            tok(1, "12.50", 170.0, 4.0),
            tok(2, "31.00", 170.0, 24.0),
        ];
        let splits = find_row_splits(&grid, &tokens, &ParamSet::default());
        assert_eq!(splits.len(), 1);
        assert_eq!(splits[0].row_index, 0);
        assert_eq!(splits[0].split_y, 20.0);
        let out = unfuse_lines(&grid, &tokens, &ParamSet::default());
        assert_eq!(out.rows, vec![bb(0.0, 0.0, 300.0, 20.0), bb(0.0, 20.0, 300.0, 40.0)]);
        assert_eq!(out.columns, grid.columns);
    }

    #[test]
    fn unfuse_identity_on_single_amounts() {
        let (grid, tokens) = sample_grid();
        let out = unfuse_lines(&grid, &tokens, &ParamSet::default());
        assert_eq!(out, grid);
    }

    #[test]
    fn unfuse_ignores_side_by_side_amounts() {
        let table = bb(0.0, 0.0, 300.0, 40.0);
        let rows = vec![bb(0.0, 0.0, 300.0, 40.0)];
        let cols = vec![bb(0.0, 0.0, 300.0, 40.0)];
        let grid = TableGrid::new(table, rows, cols, 0).unwrap();
        let tokens = vec![tok(0, "12.50", 10.0, 14.0), tok(1, "31.00", 100.0, 14.0)];
        let out = unfuse_lines(&grid, &tokens, &ParamSet::default());
        assert_eq!(out, grid);
    }

    #[test]
    fn remove_extra_drops_distant_bottom_row() {
        let (grid, mut tokens) = sample_grid();
        // Append a far-away row: gap 120 > beta(3) x max height (35).
        let mut rows = grid.rows.clone();
        rows.push(bb(80.0, 540.0, 700.0, 560.0));
        let table = bb(80.0, 300.0, 700.0, 560.0);
        let noisy = TableGrid::new(table, rows, grid.columns.clone(), 1).unwrap();
        let next = tokens.len() as u64;
        tokens.push(tok(next, "Cedar", 85.0, 544.0));
        let out = remove_extra_lines(&noisy, &tokens, &ParamSet::default());
        assert_eq!(out.rows, grid.rows);
    }

    #[test]
    fn remove_extra_identity_on_clean_grid() {
        let (grid, tokens) = sample_grid();
        let out = remove_extra_lines(&grid, &tokens, &ParamSet::default());
        assert_eq!(out, grid);
    }

    #[test]
    fn remove_extra_drops_type_mismatched_notes_row() {
        let (grid, mut tokens) = sample_grid();
        let mut rows = grid.rows.clone();
        rows.push(bb(80.0, 420.0, 700.0, 450.0));
        let table = bb(80.0, 300.0, 700.0, 450.0);
        let noisy = TableGrid::new(table, rows, grid.columns.clone(), 1).unwrap();
        // Alphabetic notes under the qty and amount columns.
        let next = tokens.len() as u64;
        tokens.push(tok(next, "thanks", 445.0, 428.0));
        tokens.push(tok(next + 1, "again", 565.0, 428.0));
        let out = remove_extra_lines(&noisy, &tokens, &ParamSet::default());
        assert_eq!(out.rows, grid.rows);
    }

    #[test]
    fn remove_extra_never_touches_header_rows() {
        let (grid, tokens) = sample_grid();
        // Keep only the header row and give it a huge gap to nothing:
        // with no body rows the grid must come back unchanged.
        let only_header =
            TableGrid::new(grid.table_bbox, vec![grid.rows[0]], grid.columns.clone(), 1).unwrap();
        let out = remove_extra_lines(&only_header, &tokens, &ParamSet::default());
        assert_eq!(out, only_header);
    }

    #[test]
    fn matrix_assigns_tokens_and_joins_in_reading_order() {
        let (grid, mut tokens) = sample_grid();
        // Second word in the first body description cell, to the right.
        let next = tokens.len() as u64;
        tokens.push(tok(next, "Chair", 150.0, 332.0));
        let m = build_cell_matrix(&grid, &tokens, &ParamSet::default()).unwrap();
        assert_eq!(m.row_count(), 4);
        assert_eq!(m.col_count(), 3);
        assert_eq!(m.header_rows, 1);
        assert_eq!(m.cells[0], vec!["Description", "Qty", "Amount"]);
        assert_eq!(m.cells[1][0], "Walnut Chair");
        assert_eq!(m.cells[2][1], "2");
        assert_eq!(m.cells[3][2], "31.25");
    }

    #[test]
    fn matrix_argmax_overlap_beats_nearest_center() {
        let table = bb(0.0, 0.0, 200.0, 20.0);
        let rows = vec![bb(0.0, 0.0, 200.0, 20.0)];
        let cols = vec![bb(0.0, 0.0, 100.0, 20.0), bb(100.0, 0.0, 200.0, 20.0)];
        let grid = TableGrid::new(table, rows, cols, 0).unwrap();
        // 70% of the token lies in the left cell even though its center
        // is close to the boundary.
        let tokens = vec![Token::new(0, "x".to_string(), bb(86.0, 5.0, 106.0, 15.0)).unwrap()];
        let m = build_cell_matrix(&grid, &tokens, &ParamSet::default()).unwrap();
        assert_eq!(m.cells[0][0], "x");
        assert_eq!(m.cells[0][1], "");
    }

    #[test]
    fn matrix_nearest_center_catches_low_overlap_tokens() {
        let table = bb(0.0, 0.0, 200.0, 60.0);
        // Rows cover only the top half; the stray token floats below them.
        let rows = vec![bb(0.0, 0.0, 200.0, 10.0)];
        let cols = vec![bb(0.0, 0.0, 90.0, 10.0), bb(110.0, 0.0, 200.0, 10.0)];
        let grid = TableGrid::new(table, rows, cols, 0).unwrap();
        let tokens = vec![tok(0, "stray", 120.0, 30.0)];
        let m = build_cell_matrix(&grid, &tokens, &ParamSet::default()).unwrap();
        assert_eq!(m.cells[0][1], "stray");
    }

    #[test]
    fn matrix_empty_grid_errors() {
        let grid = TableGrid::new(bb(0.0, 0.0, 10.0, 10.0), vec![], vec![], 0).unwrap();
        assert_eq!(
            build_cell_matrix(&grid, &[], &ParamSet::default()),
            Err(TsrError::EmptyGrid)
        );
    }

    #[test]
    fn tsr_chain_is_idempotent_here() {
        let (grid, mut tokens) = sample_grid();
        let mut cols = grid.columns.clone();
        cols.push(bb(606.0, 300.0, 746.0, 420.0));
        cols.sort_by(|a, b| a.x0.partial_cmp(&b.x0).unwrap());
        let mut rows = grid.rows.clone();
        rows.push(bb(80.0, 540.0, 700.0, 560.0));
        let table = bb(80.0, 300.0, 746.0, 560.0);
        let noisy = TableGrid::new(table, rows, cols, 1).unwrap();
        let next = tokens.len() as u64;
        tokens.push(tok(next, "Cedar", 85.0, 544.0));
        let params = ParamSet::default();
        let chain = |g: &TableGrid| {
            let g = resolve_overlapping_columns(g, &tokens, &params);
            let g = unfuse_lines(&g, &tokens, &params);
            remove_extra_lines(&g, &tokens, &params)
        };
        let once = chain(&noisy);
        let twice = chain(&once);
        assert_eq!(once, twice);
    }
}
