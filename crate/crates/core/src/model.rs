//! Shared domain types: boxes, tokens, pages, detector candidates, grids,
//! cell matrices, tuning parameters, and stage toggles.
//!
//! All types are immutable after construction and safe to share across
//! workers; refinement never mutates its inputs, it returns new values.
//! Invariants are checked at construction and can be re-checked on whole
//! documents with [`validate_document`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

/// Errors raised while constructing or validating domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("duplicate token id {0}")]
    DuplicateTokenId(u64),
    #[error("token {0} has empty text")]
    EmptyTokenText(u64),
    #[error("confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("ragged cell matrix: row {row} has {got} cells, expected {expected}")]
    RaggedMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
}

/// Axis-aligned rectangle in page pixel coordinates.
///
/// Origin is the top-left corner of the page and y grows downward.
/// Coordinates are real-valued: OCR engines emit sub-pixel boxes and any
/// rounding is the caller's concern. Zero-area boxes are legal (degenerate
/// OCR artifacts occur); negative extents are rejected at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, ModelError> {
        let b = BBox { x0, y0, x1, y1 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = self.x0.is_finite()
            && self.y0.is_finite()
            && self.x1.is_finite()
            && self.y1.is_finite();
        if !finite {
            return Err(ModelError::InvalidGeometry("non-finite coordinate"));
        }
        // NaN would also fail here, but the finite check above reads better.
        if !(self.x0 <= self.x1 && self.y0 <= self.y1) {
            return Err(ModelError::InvalidGeometry("negative extent"));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    /// Boundary points count as inside.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    /// Intersection rectangle, or `None` when the boxes do not meet.
    /// Touching edges yield a zero-area intersection, not `None`.
    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        if x0 <= x1 && y0 <= y1 {
            Some(BBox { x0, y0, x1, y1 })
        } else {
            None
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        self.intersection(other).map_or(0.0, |b| b.area())
    }

    /// Smallest box enclosing both.
    pub fn enclosing(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Tight hull of a collection of boxes; `None` for an empty iterator.
    pub fn hull<'a, I: IntoIterator<Item = &'a BBox>>(boxes: I) -> Option<BBox> {
        let mut it = boxes.into_iter();
        let first = *it.next()?;
        Some(it.fold(first, |acc, b| acc.enclosing(b)))
    }
}

/// One OCR word: the atomic content element.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub id: u64,
    pub text: String,
    pub bbox: BBox,
}

impl Token {
    pub fn new(id: u64, text: String, bbox: BBox) -> Result<Self, ModelError> {
        let t = Token { id, text, bbox };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.bbox.validate()?;
        if self.text.trim().is_empty() {
            return Err(ModelError::EmptyTokenText(self.id));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        self.bbox.center()
    }
}

/// A page of OCR output: dimensions plus its ordered tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub width: f64,
    pub height: f64,
    pub tokens: Vec<Token>,
}

impl Page {
    pub fn new(width: f64, height: f64, tokens: Vec<Token>) -> Result<Self, ModelError> {
        let p = Page {
            width,
            height,
            tokens,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.width.is_finite() && self.height.is_finite() && self.width > 0.0 && self.height > 0.0)
        {
            return Err(ModelError::InvalidGeometry("page dimensions must be positive"));
        }
        let mut seen = BTreeSet::new();
        for t in &self.tokens {
            t.validate()?;
            if !seen.insert(t.id) {
                return Err(ModelError::DuplicateTokenId(t.id));
            }
            let inside = t.bbox.x0 >= 0.0
                && t.bbox.y0 >= 0.0
                && t.bbox.x1 <= self.width
                && t.bbox.y1 <= self.height;
            if !inside {
                return Err(ModelError::InvalidGeometry("token bbox outside page"));
            }
        }
        Ok(())
    }

    pub fn token_by_id(&self, id: u64) -> Option<&Token> {
        self.tokens.iter().find(|t| t.id == id)
    }
}

/// Which detector produced a candidate region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    DetectorA,
    DetectorB,
}

/// One detector output: a candidate table region with its confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTable {
    pub bbox: BBox,
    pub confidence: f64,
    pub source: Source,
}

impl CandidateTable {
    pub fn new(bbox: BBox, confidence: f64, source: Source) -> Result<Self, ModelError> {
        let c = CandidateTable {
            bbox,
            confidence,
            source,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.bbox.validate()?;
        if !(self.confidence.is_finite() && (0.0..=1.0).contains(&self.confidence)) {
            return Err(ModelError::InvalidConfidence(self.confidence));
        }
        Ok(())
    }
}

/// The structural prediction a recognizer emits for one table: ordered row
/// bands (top to bottom), ordered column bands (left to right), and the
/// number of leading rows that are header rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGrid {
    pub table_bbox: BBox,
    pub rows: Vec<BBox>,
    pub columns: Vec<BBox>,
    pub header_rows: usize,
}

impl TableGrid {
    pub fn new(
        table_bbox: BBox,
        rows: Vec<BBox>,
        columns: Vec<BBox>,
        header_rows: usize,
    ) -> Result<Self, ModelError> {
        let g = TableGrid {
            table_bbox,
            rows,
            columns,
            header_rows,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.table_bbox.validate()?;
        for b in self.rows.iter().chain(self.columns.iter()) {
            b.validate()?;
            if b.intersection(&self.table_bbox).is_none() {
                return Err(ModelError::InvalidGrid("band does not intersect table bbox"));
            }
        }
        if self.rows.windows(2).any(|w| !(w[0].y0 < w[1].y0)) {
            return Err(ModelError::InvalidGrid("rows not strictly sorted by y0"));
        }
        if self.columns.windows(2).any(|w| !(w[0].x0 < w[1].x0)) {
            return Err(ModelError::InvalidGrid("columns not strictly sorted by x0"));
        }
        if self.header_rows > self.rows.len() {
            return Err(ModelError::InvalidGrid("header_rows exceeds row count"));
        }
        Ok(())
    }

    /// Leading rows flagged as header rows.
    pub fn header_band(&self) -> Option<BBox> {
        BBox::hull(self.rows.iter().take(self.header_rows))
    }

    pub fn body_rows(&self) -> &[BBox] {
        &self.rows[self.header_rows.min(self.rows.len())..]
    }
}

/// R x C matrix of cell text, the unit content comparison works on.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMatrix {
    pub cells: Vec<Vec<String>>,
    pub header_rows: usize,
}

impl CellMatrix {
    pub fn new(cells: Vec<Vec<String>>, header_rows: usize) -> Result<Self, ModelError> {
        let m = CellMatrix { cells, header_rows };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let expected = self.cells.first().map_or(0, Vec::len);
        for (row, r) in self.cells.iter().enumerate() {
            if r.len() != expected {
                return Err(ModelError::RaggedMatrix {
                    row,
                    got: r.len(),
                    expected,
                });
            }
        }
        Ok(())
    }

    pub fn empty() -> Self {
        CellMatrix {
            cells: Vec::new(),
            header_rows: 0,
        }
    }

    pub fn row_count(&self) -> usize {
        self.cells.len()
    }

    pub fn col_count(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cell_count(&self) -> usize {
        self.row_count() * self.col_count()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_count() == 0
    }
}

/// Weights the table chooser applies to its score components. The text
/// weight is shared between the keyword score and the header-location
/// score, split evenly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChooserWeights {
    pub confidence: f64,
    pub area: f64,
    pub width: f64,
    pub height: f64,
    pub text: f64,
}

impl Default for ChooserWeights {
    fn default() -> Self {
        // Text evidence can override confidence: detectors routinely score
        // table-like noise above the actual table.
        ChooserWeights {
            confidence: 1.0,
            area: 0.25,
            width: 0.25,
            height: 0.25,
            text: 1.0,
        }
    }
}

/// Every tunable knob of the refinement stages.
///
/// `dbscan_eps_y` / `dbscan_eps_x` are optional: when unset, clustering uses
/// data-adaptive radii derived from the page's median token size, which
/// survive resolution changes. The tuner overrides them with absolute values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// Candidate confidence threshold.
    pub alpha: f64,
    /// Trailing-row gap multiplier (times the largest row height).
    pub beta: f64,
    /// Column-overlap threshold.
    pub theta_iou: f64,
    pub dbscan_eps_y: Option<f64>,
    pub dbscan_eps_x: Option<f64>,
    pub dbscan_min_pts: usize,
    pub chooser_weights: ChooserWeights,
    /// Levenshtein tolerance for header keyword matching.
    pub header_match_max_dist: usize,
    /// Lines scoring above this are pruned from the bottom of the region.
    pub suspicious_threshold: f64,
    pub outlier_weight: f64,
    pub pattern_weight: f64,
    /// Fraction of a row's tokens allowed outside every column span.
    pub misalign_fraction: f64,
    /// How many stacked amounts a cell needs before its row is split.
    pub amount_min_count: usize,
    /// Minimum token/cell overlap ratio for direct cell assignment.
    pub token_assign_overlap: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            alpha: 0.5,
            beta: 3.0,
            theta_iou: 0.34,
            dbscan_eps_y: None,
            dbscan_eps_x: None,
            dbscan_min_pts: 2,
            chooser_weights: ChooserWeights::default(),
            header_match_max_dist: 1,
            suspicious_threshold: 0.3,
            outlier_weight: 1.0,
            pattern_weight: 1.0,
            misalign_fraction: 0.4,
            amount_min_count: 2,
            token_assign_overlap: 0.5,
        }
    }
}

impl ParamSet {
    pub fn validate(&self) -> Result<(), ModelError> {
        fn check(ok: bool, what: &'static str) -> Result<(), ModelError> {
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParam(what))
            }
        }
        check(
            self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha),
            "alpha must be in [0, 1]",
        )?;
        check(self.beta.is_finite() && self.beta > 0.0, "beta must be > 0")?;
        check(
            self.theta_iou.is_finite() && self.theta_iou > 0.0 && self.theta_iou < 1.0,
            "theta_iou must be in (0, 1)",
        )?;
        for eps in [self.dbscan_eps_y, self.dbscan_eps_x].into_iter().flatten() {
            check(eps.is_finite() && eps > 0.0, "dbscan eps must be > 0")?;
        }
        check(self.dbscan_min_pts >= 1, "dbscan_min_pts must be >= 1")?;
        let w = &self.chooser_weights;
        for v in [w.confidence, w.area, w.width, w.height, w.text] {
            check(v.is_finite() && v >= 0.0, "chooser weights must be >= 0")?;
        }
        check(
            self.suspicious_threshold.is_finite() && self.suspicious_threshold >= 0.0,
            "suspicious_threshold must be >= 0",
        )?;
        check(
            self.outlier_weight.is_finite() && self.outlier_weight >= 0.0,
            "outlier_weight must be >= 0",
        )?;
        check(
            self.pattern_weight.is_finite() && self.pattern_weight >= 0.0,
            "pattern_weight must be >= 0",
        )?;
        check(
            self.misalign_fraction.is_finite() && (0.0..=1.0).contains(&self.misalign_fraction),
            "misalign_fraction must be in [0, 1]",
        )?;
        check(self.amount_min_count >= 2, "amount_min_count must be >= 2")?;
        check(
            self.token_assign_overlap.is_finite()
                && self.token_assign_overlap > 0.0
                && self.token_assign_overlap <= 1.0,
            "token_assign_overlap must be in (0, 1]",
        )?;
        Ok(())
    }

    pub fn validated(self) -> Result<Self, ModelError> {
        self.validate()?;
        Ok(self)
    }
}

/// Per-stage enable flags. Disabled stages behave as identity, which makes
/// the all-off configuration reproduce the unrefined baseline exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleToggles {
    pub ensemble: bool,
    pub table_chooser: bool,
    pub header_refiner: bool,
    pub oversegmentation: bool,
    pub overlap_columns: bool,
    pub unfuse_lines: bool,
    pub remove_extra_lines: bool,
}

impl ModuleToggles {
    pub fn all_enabled() -> Self {
        ModuleToggles {
            ensemble: true,
            table_chooser: true,
            header_refiner: true,
            oversegmentation: true,
            overlap_columns: true,
            unfuse_lines: true,
            remove_extra_lines: true,
        }
    }

    pub fn all_disabled() -> Self {
        ModuleToggles {
            ensemble: false,
            table_chooser: false,
            header_refiner: false,
            oversegmentation: false,
            overlap_columns: false,
            unfuse_lines: false,
            remove_extra_lines: false,
        }
    }

    /// Detection stages off, structure stages on.
    pub fn without_td(mut self) -> Self {
        self.ensemble = false;
        self.table_chooser = false;
        self.header_refiner = false;
        self.oversegmentation = false;
        self
    }

    /// Structure stages off, detection stages on.
    pub fn without_tsr(mut self) -> Self {
        self.overlap_columns = false;
        self.unfuse_lines = false;
        self.remove_extra_lines = false;
        self
    }

    /// True when any stage that relocates the table bbox is enabled.
    pub fn any_td(&self) -> bool {
        self.table_chooser || self.header_refiner || self.oversegmentation
    }
}

impl Default for ModuleToggles {
    fn default() -> Self {
        Self::all_enabled()
    }
}

/// A validated page together with its predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub page: Page,
    pub candidates: Vec<CandidateTable>,
    pub grid: Option<TableGrid>,
}

/// Aggregates and re-validates the parts of one document.
pub fn validate_document(
    page: Page,
    candidates: Vec<CandidateTable>,
    grid: Option<TableGrid>,
) -> Result<Document, ModelError> {
    page.validate()?;
    for c in &candidates {
        c.validate()?;
    }
    if let Some(g) = &grid {
        g.validate()?;
    }
    Ok(Document {
        page,
        candidates,
        grid,
    })
}

/// Ground-truth record for one document: the tight table region, the true
/// grid, and the true cell contents.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub table_bbox: BBox,
    pub grid: TableGrid,
    pub cells: CellMatrix,
}

/// A document paired with its ground truth, the unit tuning and evaluation
/// operate on.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDocument {
    pub doc: Document,
    pub gt: GroundTruth,
}
