//! Evaluation: purity/completeness, GIoU aggregation, and grid content
//! similarity (factored alignment plus an exact brute-force oracle).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{BBox, CellMatrix, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("matrix dimension {0} exceeds the brute-force limit of {MAX_BRUTE_FORCE_DIM}")]
    TooLarge(usize),
}

/// Document-level containment measures. Elements are tokens by center
/// containment; a prediction is pure when it grabs only ground-truth
/// elements and complete when it covers all of them. An empty prediction is
/// vacuously pure and complete only against an empty ground truth.
pub fn purity_completeness(pred_bbox: &BBox, gt_bbox: &BBox, tokens: &[Token]) -> (bool, bool) {
    let mut pure = true;
    let mut complete = true;
    for t in tokens {
        let (cx, cy) = t.center();
        let in_pred = pred_bbox.contains_point(cx, cy);
        let in_gt = gt_bbox.contains_point(cx, cy);
        if in_pred && !in_gt {
            pure = false;
        }
        if in_gt && !in_pred {
            complete = false;
        }
    }
    (pure, complete)
}

/// Precision / recall / F1 triple of a grid content comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GritsScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl GritsScores {
    fn from_score(score: f64, gt_cells: usize, pred_cells: usize) -> GritsScores {
        match (gt_cells, pred_cells) {
            (0, 0) => GritsScores {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            },
            (0, _) | (_, 0) => GritsScores {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
            },
            _ => GritsScores {
                precision: score / pred_cells as f64,
                recall: score / gt_cells as f64,
                f1: 2.0 * score / (gt_cells + pred_cells) as f64,
            },
        }
    }
}

/// Character-level similarity of two cell texts:
/// `2 * LCS(a, b) / (|a| + |b|)`, with two empty cells counting as a
/// perfect structural agreement.
pub fn cell_similarity(a: &str, b: &str) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let av: Vec<char> = a.chars().collect();
    let bv: Vec<char> = b.chars().collect();
    2.0 * lcs_len(&av, &bv) as f64 / (av.len() + bv.len()) as f64
}

fn lcs_len(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for av in a {
        for (j, bv) in b.iter().enumerate() {
            cur[j + 1] = if av == bv {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Maximum-weight order-preserving alignment of two sequences:
/// the classic weighted-LCS dynamic program. Returns the total weight and
/// the matched index pairs (both strictly increasing).
fn align<S: Fn(usize, usize) -> f64>(n: usize, m: usize, sim: S) -> (f64, Vec<(usize, usize)>) {
    let mut dp = vec![vec![0.0f64; m + 1]; n + 1];
    for i in 1..=n {
        for j in 1..=m {
            dp[i][j] = dp[i - 1][j]
                .max(dp[i][j - 1])
                .max(dp[i - 1][j - 1] + sim(i - 1, j - 1));
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        if dp[i][j] == dp[i - 1][j] {
            i -= 1;
        } else if dp[i][j] == dp[i][j - 1] {
            j -= 1;
        } else {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        }
    }
    pairs.reverse();
    (dp[n][m], pairs)
}

/// Grid content similarity via a factored two-phase alignment.
///
/// Phase 1 aligns columns: the similarity of a column pair is itself the
/// weighted-LCS alignment score of their cell sequences. Phase 2 aligns
/// rows restricted to the aligned columns. The final score sums cell
/// similarities over the selected sub-grid, a valid (possibly suboptimal)
/// order-preserving alignment, so the result never exceeds the exact
/// brute-force optimum.
pub fn grits_con(gt: &CellMatrix, pred: &CellMatrix) -> GritsScores {
    if gt.is_empty() || pred.is_empty() {
        return GritsScores::from_score(0.0, gt.cell_count(), pred.cell_count());
    }
    let (gr, gc) = (gt.row_count(), gt.col_count());
    let (pr, pc) = (pred.row_count(), pred.col_count());

    // Cache pairwise cell similarities: dimensions are small in practice.
    let mut f = vec![vec![0.0f64; pr * pc]; gr * gc];
    for gi in 0..gr {
        for gj in 0..gc {
            for pi in 0..pr {
                for pj in 0..pc {
                    f[gi * gc + gj][pi * pc + pj] =
                        cell_similarity(&gt.cells[gi][gj], &pred.cells[pi][pj]);
                }
            }
        }
    }
    let fval = |gi: usize, gj: usize, pi: usize, pj: usize| f[gi * gc + gj][pi * pc + pj];

    let col_sim = |gj: usize, pj: usize| {
        let (score, _) = align(gr, pr, |gi, pi| fval(gi, gj, pi, pj));
        score
    };
    let (_, col_pairs) = align(gc, pc, col_sim);

    let row_sim = |gi: usize, pi: usize| {
        col_pairs
            .iter()
            .map(|&(gj, pj)| fval(gi, gj, pi, pj))
            .sum::<f64>()
    };
    let (score, _) = align(gr, pr, row_sim);
    GritsScores::from_score(score, gt.cell_count(), pred.cell_count())
}

/// Largest matrix dimension the exhaustive oracle accepts.
pub const MAX_BRUTE_FORCE_DIM: usize = 4;

/// Exact grid content similarity by exhaustive maximization over all pairs
/// of equal-length row subsequences and equal-length column subsequences.
/// Only intended for tiny matrices; dimensions above
/// [`MAX_BRUTE_FORCE_DIM`] are rejected.
pub fn grits_con_bruteforce(
    gt: &CellMatrix,
    pred: &CellMatrix,
) -> Result<GritsScores, MetricsError> {
    for dim in [
        gt.row_count(),
        gt.col_count(),
        pred.row_count(),
        pred.col_count(),
    ] {
        if dim > MAX_BRUTE_FORCE_DIM {
            return Err(MetricsError::TooLarge(dim));
        }
    }
    if gt.is_empty() || pred.is_empty() {
        return Ok(GritsScores::from_score(
            0.0,
            gt.cell_count(),
            pred.cell_count(),
        ));
    }
    let row_choices = equal_length_subsequences(gt.row_count(), pred.row_count());
    let col_choices = equal_length_subsequences(gt.col_count(), pred.col_count());
    let mut best = 0.0f64;
    for (g_rows, p_rows) in &row_choices {
        for (g_cols, p_cols) in &col_choices {
            let mut score = 0.0;
            for (gi, pi) in g_rows.iter().zip(p_rows) {
                for (gj, pj) in g_cols.iter().zip(p_cols) {
                    score += cell_similarity(&gt.cells[*gi][*gj], &pred.cells[*pi][*pj]);
                }
            }
            best = best.max(score);
        }
    }
    Ok(GritsScores::from_score(
        best,
        gt.cell_count(),
        pred.cell_count(),
    ))
}

/// All pairs of equal-length index subsequences of 0..n and 0..m.
fn equal_length_subsequences(n: usize, m: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for k in 1..=n.min(m) {
        for a in combinations(n, k) {
            for b in combinations(m, k) {
                out.push((a.clone(), b));
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Normal-approximation half-width of a 95% confidence interval.
pub fn ci95(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    1.96 * libm::sqrt(var / n as f64)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Detection outcome for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct TdDocRecord {
    pub doc: String,
    pub pure: bool,
    pub complete: bool,
    pub giou: f64,
}

/// Aggregated detection report, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct TdReport {
    pub purity_pct: f64,
    pub completeness_pct: f64,
    pub mean_giou_pct: f64,
    pub ci95_giou: f64,
    pub documents: Vec<TdDocRecord>,
}

pub fn td_report(documents: Vec<TdDocRecord>) -> TdReport {
    let n = documents.len().max(1) as f64;
    let pure = documents.iter().filter(|d| d.pure).count() as f64;
    let complete = documents.iter().filter(|d| d.complete).count() as f64;
    let gious_pct: Vec<f64> = documents.iter().map(|d| d.giou * 100.0).collect();
    TdReport {
        purity_pct: 100.0 * pure / n,
        completeness_pct: 100.0 * complete / n,
        mean_giou_pct: mean(&gious_pct),
        ci95_giou: ci95(&gious_pct),
        documents,
    }
}

/// Structure outcome for one document. The per-document F1 is the harmonic
/// mean of that document's precision and recall.
#[derive(Debug, Clone, PartialEq)]
pub struct TsrDocRecord {
    pub doc: String,
    pub scores: GritsScores,
}

/// Aggregated structure report, in [0, 1], with 95% confidence intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct TsrReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_ci95: f64,
    pub recall_ci95: f64,
    pub f1_ci95: f64,
    pub documents: Vec<TsrDocRecord>,
}

pub fn tsr_report(documents: Vec<TsrDocRecord>) -> TsrReport {
    let p: Vec<f64> = documents.iter().map(|d| d.scores.precision).collect();
    let r: Vec<f64> = documents.iter().map(|d| d.scores.recall).collect();
    let f: Vec<f64> = documents.iter().map(|d| d.scores.f1).collect();
    TsrReport {
        precision: mean(&p),
        recall: mean(&r),
        f1: mean(&f),
        precision_ci95: ci95(&p),
        recall_ci95: ci95(&r),
        f1_ci95: ci95(&f),
        documents,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Token;
    use alloc::string::ToString;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn tok(id: u64, x: f64, y: f64) -> Token {
        Token::new(id, "w".to_string(), bb(x, y, x + 10.0, y + 10.0)).unwrap()
    }

    fn matrix(rows: &[&[&str]]) -> CellMatrix {
        CellMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn purity_and_completeness_directions() {
        let tokens = vec![tok(0, 10.0, 10.0), tok(1, 50.0, 10.0), tok(2, 90.0, 10.0)];
        let gt = bb(0.0, 0.0, 110.0, 30.0);
        // Prediction covers only the first two tokens.
        let pred = bb(0.0, 0.0, 70.0, 30.0);
        assert_eq!(purity_completeness(&pred, &gt, &tokens), (true, false));
        assert_eq!(purity_completeness(&gt, &gt, &tokens), (true, true));
    }

    #[test]
    fn impure_but_complete_prediction() {
        let tokens = vec![tok(0, 10.0, 10.0), tok(1, 50.0, 10.0), tok(2, 90.0, 50.0)];
        let gt = bb(0.0, 0.0, 70.0, 30.0); // tokens 0 and 1
        let pred = bb(0.0, 0.0, 110.0, 70.0); // grabs footer token 2 as well
        assert_eq!(purity_completeness(&pred, &gt, &tokens), (false, true));
    }

    #[test]
    fn empty_prediction_is_vacuously_pure() {
        let tokens = vec![tok(0, 50.0, 50.0)];
        let pred = bb(0.0, 0.0, 5.0, 5.0);
        let gt = bb(40.0, 40.0, 70.0, 70.0);
        assert_eq!(purity_completeness(&pred, &gt, &tokens), (true, false));
    }

    #[test]
    fn cell_similarity_edges() {
        assert_eq!(cell_similarity("", ""), 1.0);
        assert_eq!(cell_similarity("", "x"), 0.0);
        assert_eq!(cell_similarity("abc", "abc"), 1.0);
        // LCS("abcd", "abed") = 3 -> 2*3/8.
        assert!((cell_similarity("abcd", "abed") - 0.75).abs() < 1e-12);
    }

    #[test]
    fn identical_matrices_score_one() {
        let m = matrix(&[&["a", "b", "c"], &["d", "e", "f"]]);
        let s = grits_con(&m, &m);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let b = grits_con_bruteforce(&m, &m).unwrap();
        assert_eq!((b.precision, b.recall, b.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn one_corrupted_cell_of_four() {
        let gt = matrix(&[&["alpha", "beta"], &["gamma", "delta"]]);
        let pred = matrix(&[&["alpha", "beta"], &["gamma", "xxxx"]]);
        let expect = GritsScores {
            precision: 0.75,
            recall: 0.75,
            f1: 0.75,
        };
        assert_eq!(grits_con(&gt, &pred), expect);
        assert_eq!(grits_con_bruteforce(&gt, &pred).unwrap(), expect);
    }

    #[test]
    fn row_deletion_scores() {
        let gt = matrix(&[&["alpha", "beta"], &["gamma", "delta"]]);
        let pred = matrix(&[&["alpha", "beta"]]);
        let s = grits_con(&gt, &pred);
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.5);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(grits_con_bruteforce(&gt, &pred).unwrap(), s);
    }

    #[test]
    fn empty_matrix_conventions() {
        let empty = CellMatrix::empty();
        let m = matrix(&[&["a"]]);
        let s = grits_con(&empty, &empty);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = grits_con(&empty, &m);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        let s = grits_con(&m, &empty);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn f1_is_symmetric() {
        let a = matrix(&[&["alpha", "beta"], &["gamma", "delta"]]);
        let b = matrix(&[&["alpha", "beto"]]);
        let ab = grits_con(&a, &b);
        let ba = grits_con(&b, &a);
        assert!((ab.f1 - ba.f1).abs() < 1e-12);
        assert!((ab.precision - ba.recall).abs() < 1e-12);
        assert!((ab.recall - ba.precision).abs() < 1e-12);
    }

    #[test]
    fn brute_force_rejects_large_matrices() {
        let m = CellMatrix::new(
            (0..5)
                .map(|i| (0..2).map(|j| alloc::format!("{i}:{j}")).collect())
                .collect(),
            0,
        )
        .unwrap();
        assert_eq!(
            grits_con_bruteforce(&m, &m),
            Err(MetricsError::TooLarge(5))
        );
    }

    #[test]
    fn ci95_matches_hand_computation() {
        // Values 1..5: mean 3, sample variance 2.5, stderr = sqrt(0.5).
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((ci95(&v) - 1.96 * libm::sqrt(0.5)).abs() < 1e-12);
        assert_eq!(ci95(&[3.0]), 0.0);
    }

    #[test]
    fn td_report_percentages() {
        let report = td_report(vec![
            TdDocRecord {
                doc: "a".to_string(),
                pure: true,
                complete: true,
                giou: 0.8,
            },
            TdDocRecord {
                doc: "b".to_string(),
                pure: false,
                complete: true,
                giou: 0.4,
            },
        ]);
        assert_eq!(report.purity_pct, 50.0);
        assert_eq!(report.completeness_pct, 100.0);
        assert!((report.mean_giou_pct - 60.0).abs() < 1e-12);
    }
}
