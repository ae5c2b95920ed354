//! DBSCAN-based estimation of physical text lines and column positions,
//! line signatures over global column clusters, and core-pattern extraction.
//!
//! Clustering is deterministic: core points expand in index order, so
//! refinement output is reproducible across runs and platforms.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{BBox, ParamSet, Token};
use crate::text::levenshtein_slice;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinesError {
    #[error("no lines to analyze")]
    NoLines,
}

/// Label for points no cluster claims.
pub const NOISE: i64 = -1;

/// Vertical reach of the 2-D isolation pass, as a multiple of the line
/// clustering radius. The line radius only spans within-line jitter; the
/// isolation pass must reach the neighboring text line (roughly two line
/// pitches) or every token in a regular grid would count as isolated.
const XY_VERTICAL_REACH: f64 = 25.0 / 6.0;

/// One estimated physical text line.
#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    /// Member token ids ordered left to right.
    pub token_ids: Vec<u64>,
    /// Tight hull of the member token boxes.
    pub bbox: BBox,
    pub y_center: f64,
}

/// A line's occupancy pattern over the global column clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSignature {
    /// Column-cluster id per non-outlier token, left to right.
    pub symbols: Vec<u32>,
    /// Tokens flagged as outliers by the x or xy clustering passes.
    pub outlier_count: usize,
}

/// Signatures for every line plus the extracted core pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureAnalysis {
    pub signatures: Vec<LineSignature>,
    /// The most frequent signature; ties resolve to the line closest to the
    /// vertical middle of the analyzed region.
    pub core_pattern: Vec<u32>,
    /// Index of the line whose signature defines the core pattern.
    pub core_index: usize,
}

fn dbscan_impl<F: Fn(usize, usize) -> bool>(
    n: usize,
    within_eps: F,
    min_pts: usize,
) -> Vec<i64> {
    // Neighborhoods include the point itself, per the usual formulation.
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| within_eps(i, j)).collect())
        .collect();
    let mut labels = vec![NOISE; n];
    let mut visited = vec![false; n];
    let mut next_cluster: i64 = 0;
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        if neighbors[seed].len() < min_pts {
            continue; // stays noise unless a later cluster absorbs it
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[seed] = cluster;
        let mut queue: Vec<usize> = neighbors[seed].clone();
        let mut qi = 0;
        while qi < queue.len() {
            let p = queue[qi];
            qi += 1;
            if labels[p] == NOISE {
                labels[p] = cluster; // border point
            }
            if visited[p] {
                continue;
            }
            visited[p] = true;
            if neighbors[p].len() >= min_pts {
                labels[p] = cluster;
                queue.extend(neighbors[p].iter().copied());
            }
        }
    }
    labels
}

/// 1-D DBSCAN with Euclidean distance. Returns one label per value;
/// `NOISE` (-1) marks points no cluster claims.
pub fn dbscan_1d(values: &[f64], eps: f64, min_pts: usize) -> Vec<i64> {
    debug_assert!(eps > 0.0 && min_pts >= 1);
    dbscan_impl(
        values.len(),
        |i, j| libm::fabs(values[i] - values[j]) <= eps,
        min_pts,
    )
}

/// 2-D DBSCAN with Euclidean distance.
pub fn dbscan_2d(points: &[(f64, f64)], eps: f64, min_pts: usize) -> Vec<i64> {
    debug_assert!(eps > 0.0 && min_pts >= 1);
    let e2 = eps * eps;
    dbscan_impl(
        points.len(),
        |i, j| {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            dx * dx + dy * dy <= e2
        },
        min_pts,
    )
}

/// Clustering radii, either taken from the parameter set or derived from
/// the page's median token size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterEps {
    pub eps_y: f64,
    pub eps_x: f64,
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    Some(values[values.len() / 2])
}

/// Resolves the clustering radii for a set of page tokens. Unset radii
/// default to 0.6x the median token height (y) and 2.0x the median token
/// width (x), which track the document's resolution.
pub fn resolve_eps(params: &ParamSet, page_tokens: &[Token]) -> ClusterEps {
    let median_h = median(page_tokens.iter().map(|t| t.bbox.height()).collect());
    let median_w = median(page_tokens.iter().map(|t| t.bbox.width()).collect());
    let eps_y = params
        .dbscan_eps_y
        .unwrap_or_else(|| median_h.map_or(8.0, |h| (0.6 * h).max(1e-6)));
    let eps_x = params
        .dbscan_eps_x
        .unwrap_or_else(|| median_w.map_or(40.0, |w| (2.0 * w).max(1e-6)));
    ClusterEps { eps_y, eps_x }
}

/// Groups tokens into physical lines by 1-D clustering of their y-centers.
/// Noise tokens become singleton lines (a one-word line is still a line).
/// Output is sorted top to bottom.
pub fn estimate_lines(tokens: &[Token], eps_y: f64, min_pts: usize) -> Vec<TextLine> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let ys: Vec<f64> = tokens.iter().map(|t| t.center().1).collect();
    let labels = dbscan_1d(&ys, eps_y, min_pts);
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut singletons: Vec<Vec<usize>> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        if *label == NOISE {
            singletons.push(vec![i]);
        } else {
            groups.entry(*label).or_default().push(i);
        }
    }
    let mut out: Vec<TextLine> = groups
        .into_values()
        .chain(singletons)
        .map(|members| build_line(tokens, members))
        .collect();
    out.sort_by(|a, b| {
        (a.y_center, a.bbox.x0, a.token_ids.first().copied())
            .partial_cmp(&(b.y_center, b.bbox.x0, b.token_ids.first().copied()))
            .expect("finite coordinates")
    });
    out
}

fn build_line(tokens: &[Token], mut members: Vec<usize>) -> TextLine {
    members.sort_by(|&a, &b| {
        let ka = (tokens[a].center().0, tokens[a].id);
        let kb = (tokens[b].center().0, tokens[b].id);
        ka.partial_cmp(&kb).expect("finite coordinates")
    });
    let bbox = BBox::hull(members.iter().map(|&i| &tokens[i].bbox)).expect("non-empty line");
    TextLine {
        token_ids: members.iter().map(|&i| tokens[i].id).collect(),
        bbox,
        y_center: (bbox.y0 + bbox.y1) / 2.0,
    }
}

/// Computes per-line signatures over global column clusters.
///
/// A 1-D clustering of all token x-centers defines the column clusters
/// (ids renumbered left to right). A second, 2-D pass over token centers in
/// eps-scaled space flags spatially isolated tokens. A token that is noise
/// in either pass counts as an outlier and contributes no symbol, so
/// `symbols.len() + outlier_count` always equals the line's token count.
pub fn line_signatures(
    all_lines: &[TextLine],
    tokens: &[Token],
    eps_x: f64,
    eps_y: f64,
    min_pts: usize,
) -> Result<SignatureAnalysis, LinesError> {
    if all_lines.is_empty() {
        return Err(LinesError::NoLines);
    }
    let index: BTreeMap<u64, &Token> = tokens.iter().map(|t| (t.id, t)).collect();
    let mut flat: Vec<(usize, &Token)> = Vec::new(); // (line index, token)
    for (li, line) in all_lines.iter().enumerate() {
        for id in &line.token_ids {
            let t = index.get(id).expect("line token ids resolve in token set");
            flat.push((li, t));
        }
    }

    let xs: Vec<f64> = flat.iter().map(|(_, t)| t.center().0).collect();
    let x_labels = dbscan_1d(&xs, eps_x, min_pts);

    // Isolation pass in eps-scaled space, so one radius serves both axes.
    let reach_y = eps_y * XY_VERTICAL_REACH;
    let scaled: Vec<(f64, f64)> = flat
        .iter()
        .map(|(_, t)| {
            let (cx, cy) = t.center();
            (cx / eps_x, cy / reach_y)
        })
        .collect();
    let xy_labels = dbscan_2d(&scaled, 1.0, min_pts);

    let remap = left_to_right_ids(&xs, &x_labels);

    let mut signatures: Vec<LineSignature> = all_lines
        .iter()
        .map(|_| LineSignature {
            symbols: Vec::new(),
            outlier_count: 0,
        })
        .collect();
    for (fi, (li, _)) in flat.iter().enumerate() {
        let sig = &mut signatures[*li];
        if x_labels[fi] == NOISE || xy_labels[fi] == NOISE {
            sig.outlier_count += 1;
        } else {
            sig.symbols.push(remap[&x_labels[fi]]);
        }
    }

    let (core_index, core_pattern) = extract_core(all_lines, &signatures);
    Ok(SignatureAnalysis {
        signatures,
        core_pattern,
        core_index,
    })
}

/// Renumbers raw cluster labels so that id 0 is the leftmost cluster.
fn left_to_right_ids(xs: &[f64], labels: &[i64]) -> BTreeMap<i64, u32> {
    let mut min_x: BTreeMap<i64, f64> = BTreeMap::new();
    for (x, label) in xs.iter().zip(labels) {
        if *label == NOISE {
            continue;
        }
        let e = min_x.entry(*label).or_insert(f64::INFINITY);
        if *x < *e {
            *e = *x;
        }
    }
    let mut order: Vec<(i64, f64)> = min_x.into_iter().collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite coordinates"));
    order
        .into_iter()
        .enumerate()
        .map(|(i, (label, _))| (label, i as u32))
        .collect()
}

fn extract_core(all_lines: &[TextLine], signatures: &[LineSignature]) -> (usize, Vec<u32>) {
    let mut counts: BTreeMap<&[u32], usize> = BTreeMap::new();
    for sig in signatures {
        *counts.entry(&sig.symbols).or_insert(0) += 1;
    }
    let max_count = counts.values().copied().max().unwrap_or(0);
    let top = BBox::hull(all_lines.iter().map(|l| &l.bbox)).expect("non-empty lines");
    let middle = (top.y0 + top.y1) / 2.0;
    let mut best: Option<(f64, usize)> = None;
    for (i, sig) in signatures.iter().enumerate() {
        if counts[&sig.symbols.as_slice()] != max_count {
            continue;
        }
        let dist = libm::fabs(all_lines[i].y_center - middle);
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, i));
        }
    }
    let (_, idx) = best.expect("at least one line");
    (idx, signatures[idx].symbols.clone())
}

/// Levenshtein distance between two signatures normalized by the longer
/// length; 0 when both are empty.
pub fn signature_distance(a: &[u32], b: &[u32]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein_slice(a, b) as f64 / longest as f64
}
