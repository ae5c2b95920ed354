//! Pure geometric primitives: overlap measures, enclosures, and
//! token-to-region / token-to-cell assignment.
//!
//! Everything here is total over zero-area boxes; overlap ratios fall back
//! to 0 rather than dividing by zero.

use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{BBox, TableGrid, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("both boxes have zero area")]
    DegenerateInput,
    #[error("grid has no rows or no columns")]
    EmptyGrid,
}

/// Intersection over union. Returns 0 when the union has zero area
/// (two zero-area boxes), so the function is total.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Generalized intersection over union, in (-1, 1]: IoU minus the fraction
/// of the smallest enclosing box not covered by the union. Unlike IoU it
/// keeps discriminating between non-overlapping pairs.
pub fn giou(a: &BBox, b: &BBox) -> Result<f64, GeometryError> {
    if a.area() <= 0.0 && b.area() <= 0.0 {
        return Err(GeometryError::DegenerateInput);
    }
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    let hull = a.enclosing(b).area();
    let iou = if union <= 0.0 { 0.0 } else { inter / union };
    if hull <= 0.0 {
        // Union positive but hull zero cannot happen; keep the map total.
        return Ok(iou);
    }
    Ok(iou - (hull - union) / hull)
}

/// How tokens are matched to a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AssignMode {
    /// Token center inside the region (boundaries count as inside).
    Center,
    /// At least this fraction of the token's own area overlaps the region.
    /// The fraction must be in (0, 1].
    Overlap(f64),
}

/// Ids of the tokens assigned to `region` under `mode`, in input order.
pub fn assign_tokens(tokens: &[Token], region: &BBox, mode: AssignMode) -> Vec<u64> {
    tokens
        .iter()
        .filter(|t| match mode {
            AssignMode::Center => {
                let (cx, cy) = t.center();
                region.contains_point(cx, cy)
            }
            AssignMode::Overlap(fraction) => {
                debug_assert!(fraction > 0.0 && fraction <= 1.0);
                let own = t.bbox.area();
                if own <= 0.0 {
                    let (cx, cy) = t.center();
                    region.contains_point(cx, cy)
                } else {
                    t.bbox.intersection_area(region) / own >= fraction
                }
            }
        })
        .map(|t| t.id)
        .collect()
}

/// One grid cell: the intersection of a row band and a column band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRegion {
    pub row_index: usize,
    pub col_index: usize,
    pub bbox: BBox,
}

/// Materializes the R x C cell lattice of a grid. A disjoint row/column
/// pair yields a zero-area cell at the row's nearest corner clamped into
/// the column's x-span, so the matrix stays rectangular and index-stable.
pub fn build_cells(grid: &TableGrid) -> Result<Vec<Vec<CellRegion>>, GeometryError> {
    if grid.rows.is_empty() || grid.columns.is_empty() {
        return Err(GeometryError::EmptyGrid);
    }
    let mut out = Vec::with_capacity(grid.rows.len());
    for (ri, row) in grid.rows.iter().enumerate() {
        let mut cells = Vec::with_capacity(grid.columns.len());
        for (ci, col) in grid.columns.iter().enumerate() {
            let bbox = match row.intersection(col) {
                Some(b) => b,
                None => degenerate_cell(row, col),
            };
            cells.push(CellRegion {
                row_index: ri,
                col_index: ci,
                bbox,
            });
        }
        out.push(cells);
    }
    Ok(out)
}

/// Zero-area placeholder for a row/column pair that does not meet:
/// each axis without overlap collapses to the nearest edge.
fn degenerate_cell(row: &BBox, col: &BBox) -> BBox {
    let (x0, x1) = if row.x1 < col.x0 {
        (col.x0, col.x0)
    } else if col.x1 < row.x0 {
        (col.x1, col.x1)
    } else {
        (row.x0.max(col.x0), row.x1.min(col.x1))
    };
    let (y0, y1) = if col.y1 < row.y0 {
        (row.y0, row.y0)
    } else if row.y1 < col.y0 {
        (row.y1, row.y1)
    } else {
        (row.y0.max(col.y0), row.y1.min(col.y1))
    };
    BBox { x0, y0, x1, y1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Token;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_identity() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_disjoint() {
        assert_eq!(iou(&bb(0.0, 0.0, 10.0, 10.0), &bb(20.0, 20.0, 30.0, 30.0)), 0.0);
    }

    #[test]
    fn iou_half_overlap() {
        let v = iou(&bb(0.0, 0.0, 10.0, 10.0), &bb(5.0, 0.0, 15.0, 10.0));
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn iou_zero_area_pair_is_zero() {
        let a = bb(1.0, 1.0, 1.0, 1.0);
        let b = bb(2.0, 2.0, 2.0, 2.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn giou_identity() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert_eq!(giou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn giou_disjoint_in_hull() {
        let v = giou(&bb(0.0, 0.0, 10.0, 10.0), &bb(20.0, 0.0, 30.0, 10.0)).unwrap();
        assert!((v - (-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn giou_approaches_minus_one() {
        let v = giou(&bb(0.0, 0.0, 1.0, 1.0), &bb(9999.0, 9999.0, 10000.0, 10000.0)).unwrap();
        assert!(v > -1.0 && v < -0.999);
    }

    #[test]
    fn giou_rejects_two_degenerate_boxes() {
        let a = bb(1.0, 1.0, 1.0, 1.0);
        assert_eq!(giou(&a, &a), Err(GeometryError::DegenerateInput));
    }

    fn tok(id: u64, x0: f64, y0: f64, x1: f64, y1: f64) -> Token {
        Token::new(id, "x".to_string(), bb(x0, y0, x1, y1)).unwrap()
    }

    #[test]
    fn assign_center_inside_and_outside() {
        let region = bb(0.0, 0.0, 100.0, 100.0);
        let toks = vec![tok(1, 40.0, 40.0, 60.0, 60.0), tok(2, 200.0, 200.0, 220.0, 220.0)];
        assert_eq!(assign_tokens(&toks, &region, AssignMode::Center), vec![1]);
    }

    #[test]
    fn assign_center_boundary_counts_inside() {
        let region = bb(0.0, 0.0, 100.0, 100.0);
        // Center sits exactly on the right edge.
        let toks = vec![tok(1, 90.0, 40.0, 110.0, 60.0)];
        assert_eq!(assign_tokens(&toks, &region, AssignMode::Center), vec![1]);
    }

    #[test]
    fn assign_overlap_fraction() {
        let region = bb(0.0, 0.0, 100.0, 100.0);
        // 60% of the token's width (and area) lies inside the region.
        let toks = vec![tok(1, 94.0, 10.0, 104.0, 20.0)];
        assert_eq!(
            assign_tokens(&toks, &region, AssignMode::Overlap(0.5)),
            vec![1]
        );
        assert_eq!(
            assign_tokens(&toks, &region, AssignMode::Overlap(0.7)),
            Vec::<u64>::new()
        );
    }

    fn grid_2x3() -> TableGrid {
        let table = bb(0.0, 0.0, 300.0, 100.0);
        let rows = vec![bb(0.0, 0.0, 300.0, 50.0), bb(0.0, 50.0, 300.0, 100.0)];
        let cols = vec![
            bb(0.0, 0.0, 100.0, 100.0),
            bb(100.0, 0.0, 200.0, 100.0),
            bb(200.0, 0.0, 300.0, 100.0),
        ];
        TableGrid::new(table, rows, cols, 0).unwrap()
    }

    #[test]
    fn build_cells_pairwise_intersections() {
        let cells = build_cells(&grid_2x3()).unwrap();
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|r| r.len() == 3));
        assert_eq!(cells[1][2].bbox, bb(200.0, 50.0, 300.0, 100.0));
    }

    #[test]
    fn build_cells_single_intersection() {
        let table = bb(0.0, 0.0, 100.0, 50.0);
        let rows = vec![bb(0.0, 0.0, 100.0, 10.0)];
        let cols = vec![bb(40.0, 0.0, 60.0, 50.0)];
        let grid = TableGrid::new(table, rows, cols, 0).unwrap();
        let cells = build_cells(&grid).unwrap();
        assert_eq!(cells[0][0].bbox, bb(40.0, 0.0, 60.0, 10.0));
    }

    #[test]
    fn build_cells_disjoint_pair_stays_rectangular() {
        let table = bb(0.0, 0.0, 300.0, 300.0);
        let rows = vec![bb(0.0, 0.0, 100.0, 10.0)];
        let cols = vec![bb(200.0, 100.0, 250.0, 300.0)];
        let grid = TableGrid::new(table, rows, cols, 0).unwrap();
        let cells = build_cells(&grid).unwrap();
        let cell = cells[0][0].bbox;
        assert_eq!(cell.area(), 0.0);
        assert_eq!(cell, bb(200.0, 10.0, 200.0, 10.0));
    }

    #[test]
    fn build_cells_empty_grid_errors() {
        let table = bb(0.0, 0.0, 10.0, 10.0);
        let grid = TableGrid::new(table, vec![], vec![], 0).unwrap();
        assert_eq!(build_cells(&grid), Err(GeometryError::EmptyGrid));
    }
}
