//! Table-detection refinement: candidate fusion, the table chooser, the
//! header refiner, and bottom-up oversegmentation pruning.
//!
//! The two box refiners are contracting (output always inside input) and
//! return the input unchanged when no qualifying evidence is found, so they
//! are total and idempotent.

use alloc::vec::Vec;
use thiserror::Error;

use crate::geometry::{assign_tokens, iou, AssignMode};
use crate::lines::{estimate_lines, line_signatures, resolve_eps, signature_distance, TextLine};
use crate::model::{BBox, CandidateTable, Page, ParamSet, Token};
use crate::text::{keyword_score, stopword_hit, HeaderDictionary};

/// Minimum keyword score for a line to qualify as a header line.
const HEADER_KEYWORD_MIN: f64 = 0.5;
/// Candidate pairs above this IoU are treated as duplicate detections.
const DEDUP_IOU: f64 = 0.9;
/// How many top lines of a candidate the text analysis inspects.
const TEXT_SCAN_LINES: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TdError {
    #[error("no candidate tables")]
    NoCandidates,
}

/// Score components for one candidate, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreComponents {
    pub confidence: f64,
    pub area: f64,
    pub width: f64,
    pub height: f64,
    pub text: f64,
    pub header_location: f64,
}

/// One candidate's chooser score. The total is the weighted sum of the
/// components; the header-location component shares the text weight,
/// split evenly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChooserScore {
    pub candidate_index: usize,
    pub components: ScoreComponents,
    pub total: f64,
}

/// Chooser result: the winning candidate plus the full score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ChooserOutcome {
    pub chosen_index: usize,
    pub scores: Vec<ChooserScore>,
    /// Set when no candidate cleared the confidence threshold and the
    /// highest-confidence one was returned instead.
    pub fallback: bool,
}

/// Merges two detectors' candidate lists. Near-duplicate pairs (IoU above
/// 0.9) collapse to the higher-confidence member; the result is ordered by
/// descending confidence.
pub fn ensemble_candidates(a: &[CandidateTable], b: &[CandidateTable]) -> Vec<CandidateTable> {
    let mut all: Vec<CandidateTable> = a.iter().chain(b.iter()).cloned().collect();
    all.sort_by(|x, y| {
        (y.confidence, &x.source)
            .partial_cmp(&(x.confidence, &y.source))
            .expect("finite confidence")
    });
    let mut kept: Vec<CandidateTable> = Vec::with_capacity(all.len());
    for cand in all {
        if kept.iter().all(|k| iou(&k.bbox, &cand.bbox) <= DEDUP_IOU) {
            kept.push(cand);
        }
    }
    kept
}

/// Index of the highest-confidence candidate (first wins on ties).
pub fn highest_confidence(candidates: &[CandidateTable]) -> Result<usize, TdError> {
    if candidates.is_empty() {
        return Err(TdError::NoCandidates);
    }
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if c.confidence > candidates[best].confidence {
            best = i;
        }
    }
    Ok(best)
}

struct CandidateEvidence {
    text: f64,
    header_location: f64,
}

/// Keyword evidence in the top lines of a candidate region.
fn text_evidence(
    bbox: &BBox,
    page: &Page,
    dict: &HeaderDictionary,
    params: &ParamSet,
) -> CandidateEvidence {
    let eps = resolve_eps(params, &page.tokens);
    let inside = tokens_inside(page, bbox);
    let lines = estimate_lines(&inside, eps.eps_y, params.dbscan_min_pts);
    let mut best_score = 0.0;
    let mut best_line: Option<&TextLine> = None;
    for line in lines.iter().take(TEXT_SCAN_LINES) {
        let refs = line_tokens(line, &inside);
        let score = keyword_score(&refs, dict, params.header_match_max_dist);
        if score > best_score {
            best_score = score;
            best_line = Some(line);
        }
    }
    let header_location = match best_line {
        Some(line) if bbox.height() > 0.0 => {
            let depth = (line.bbox.y0 - bbox.y0) / bbox.height();
            (1.0 - depth).clamp(0.0, 1.0)
        }
        Some(_) => 1.0,
        None => 0.0,
    };
    CandidateEvidence {
        text: best_score,
        header_location,
    }
}

/// Scores candidates whose confidence clears `alpha` and picks the best.
///
/// Components: raw confidence; area, width, and height each normalized by
/// the maximum among the scored candidates; keyword evidence over the top
/// lines; and header location (1 minus the relative depth of the best
/// keyword line, so evidence near the top scores higher). When the filter
/// leaves no survivors the highest-confidence candidate is returned with
/// the `fallback` flag set.
pub fn choose_table(
    candidates: &[CandidateTable],
    page: &Page,
    dict: &HeaderDictionary,
    params: &ParamSet,
) -> Result<ChooserOutcome, TdError> {
    if candidates.is_empty() {
        return Err(TdError::NoCandidates);
    }
    let mut survivors: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].confidence >= params.alpha)
        .collect();
    let fallback = survivors.is_empty();
    if fallback {
        survivors.push(highest_confidence(candidates)?);
    }

    let max_area = fold_max(survivors.iter().map(|&i| candidates[i].bbox.area()));
    let max_width = fold_max(survivors.iter().map(|&i| candidates[i].bbox.width()));
    let max_height = fold_max(survivors.iter().map(|&i| candidates[i].bbox.height()));
    let norm = |v: f64, max: f64| if max > 0.0 { v / max } else { 0.0 };

    let w = &params.chooser_weights;
    let mut scores = Vec::with_capacity(survivors.len());
    for &i in &survivors {
        let cand = &candidates[i];
        let evidence = text_evidence(&cand.bbox, page, dict, params);
        let components = ScoreComponents {
            confidence: cand.confidence,
            area: norm(cand.bbox.area(), max_area),
            width: norm(cand.bbox.width(), max_width),
            height: norm(cand.bbox.height(), max_height),
            text: evidence.text,
            header_location: evidence.header_location,
        };
        let total = w.confidence * components.confidence
            + w.area * components.area
            + w.width * components.width
            + w.height * components.height
            + w.text / 2.0 * components.text
            + w.text / 2.0 * components.header_location;
        scores.push(ChooserScore {
            candidate_index: i,
            components,
            total,
        });
    }

    let mut best = 0;
    for (s, score) in scores.iter().enumerate().skip(1) {
        if score.total > scores[best].total {
            best = s;
        }
    }
    Ok(ChooserOutcome {
        chosen_index: scores[best].candidate_index,
        scores,
        fallback,
    })
}

fn fold_max<I: Iterator<Item = f64>>(values: I) -> f64 {
    values.fold(0.0, f64::max)
}

fn tokens_inside(page: &Page, bbox: &BBox) -> Vec<Token> {
    let ids = assign_tokens(&page.tokens, bbox, AssignMode::Center);
    page.tokens
        .iter()
        .filter(|t| ids.contains(&t.id))
        .cloned()
        .collect()
}

fn line_tokens<'a>(line: &TextLine, tokens: &'a [Token]) -> Vec<&'a Token> {
    line.token_ids
        .iter()
        .filter_map(|id| tokens.iter().find(|t| t.id == *id))
        .collect()
}

/// Crops the top of the region down to the first line that looks like a real
/// table header: enough keyword hits, no stopword hit, and occupancy of at
/// least two distinct column clusters (a line hugging a single margin is
/// ordinary prose, not a header). Returns the input unchanged when no line
/// qualifies.
pub fn refine_header(
    bbox: &BBox,
    page: &Page,
    dict: &HeaderDictionary,
    params: &ParamSet,
) -> BBox {
    let eps = resolve_eps(params, &page.tokens);
    let inside = tokens_inside(page, bbox);
    if inside.is_empty() {
        return *bbox;
    }
    let lines = estimate_lines(&inside, eps.eps_y, params.dbscan_min_pts);
    let Ok(analysis) = line_signatures(&lines, &inside, eps.eps_x, eps.eps_y, params.dbscan_min_pts)
    else {
        return *bbox;
    };
    for (line, sig) in lines.iter().zip(&analysis.signatures) {
        let refs = line_tokens(line, &inside);
        let score = keyword_score(&refs, dict, params.header_match_max_dist);
        if score < HEADER_KEYWORD_MIN {
            continue;
        }
        if stopword_hit(&refs, dict) {
            continue;
        }
        let mut clusters: Vec<u32> = sig.symbols.clone();
        clusters.sort_unstable();
        clusters.dedup();
        if clusters.len() < 2 {
            continue;
        }
        let y0 = line.bbox.y0.clamp(bbox.y0, bbox.y1);
        return BBox { y0, ..*bbox };
    }
    *bbox
}

/// Removes suspicious trailing lines from the bottom of the region.
///
/// Each line's suspiciousness is `outlier_weight * outliers +
/// pattern_weight * normalized_distance(signature, core_pattern)`.
/// Scanning bottom-up, suspicious lines are dropped and the bottom edge is
/// raised to the first non-suspicious line; lines above that are never
/// touched. A single line is its own core, and a region whose bottom line
/// is already clean comes back unchanged.
pub fn prune_oversegmentation(bbox: &BBox, page: &Page, params: &ParamSet) -> BBox {
    let eps = resolve_eps(params, &page.tokens);
    let inside = tokens_inside(page, bbox);
    let lines = estimate_lines(&inside, eps.eps_y, params.dbscan_min_pts);
    if lines.len() <= 1 {
        return *bbox;
    }
    let Ok(analysis) = line_signatures(&lines, &inside, eps.eps_x, eps.eps_y, params.dbscan_min_pts)
    else {
        return *bbox;
    };
    let suspicious: Vec<bool> = analysis
        .signatures
        .iter()
        .map(|sig| {
            let deviation = signature_distance(&sig.symbols, &analysis.core_pattern);
            let score =
                params.outlier_weight * sig.outlier_count as f64 + params.pattern_weight * deviation;
            score > params.suspicious_threshold
        })
        .collect();
    let Some(keep) = suspicious.iter().rposition(|s| !s) else {
        return *bbox;
    };
    if keep == lines.len() - 1 {
        return *bbox;
    }
    let y1 = lines[keep].bbox.y1.clamp(bbox.y0, bbox.y1);
    BBox { y1, ..*bbox }
}
