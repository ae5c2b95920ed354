//! Post-processing toolkit for table extraction pipelines.
//!
//! Detectors and structure recognizers emit a table bounding box, row/column
//! boxes, and OCR tokens. This crate refines those predictions with a chain
//! of geometric and textual heuristics, evaluates them (purity/completeness,
//! GIoU, grid content similarity), tunes the heuristic parameters with a
//! genetic algorithm, and generates seeded synthetic corpora with injected
//! defects for testing and tuning.
//!
//! The crate is `no_std` (with `alloc`): everything here is pure computation
//! over in-memory documents. File formats, configuration, and the command
//! line live in the companion `gridmend-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ga;
pub mod geometry;
pub mod lines;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod synth;
pub mod td;
pub mod text;
pub mod tsr;

pub use model::{
    BBox, CandidateTable, CellMatrix, Document, GroundTruth, LabeledDocument, ModelError,
    ModuleToggles, Page, ParamSet, Source, TableGrid, Token, validate_document,
};
