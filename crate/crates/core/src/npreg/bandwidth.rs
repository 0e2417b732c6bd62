//! Bandwidth selection by K-fold cross-validation.
//!
//! Held-out predictions come from a grid fit interpolated at the
//! held-out predictor values, which keeps the sweep cheap at large
//! sample sizes. Ties break toward the larger (smoother) bandwidth.
//! "Tie" is judged on paired per-fold score differences: a candidate
//! ties the score minimizer when its mean fold-score gap is within one
//! standard error of that gap. CV curves are flat near their minimum,
//! so an exact-argmin rule would pick an arbitrary rough candidate on
//! noise alone; pairing cancels the noise shared by all candidates
//! before the comparison.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::exec;
use crate::npreg::local_poly::{fit_multi, interp_curve, Design};
use crate::npreg::{data_range, default_grid};
use crate::rng;

/// Cross-validation knobs shared by the smoothing estimators.
#[derive(Debug, Clone)]
pub struct CvOptions {
    pub folds: usize,
    /// Number of log-spaced candidates.
    pub candidates: usize,
    /// Candidate span as fractions of the predictor range.
    pub span: (f64, f64),
    pub seed: u64,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { folds: 5, candidates: 10, span: (0.05, 0.5), seed: 0 }
    }
}

impl CvOptions {
    pub fn build_candidates(&self, range: f64) -> Vec<f64> {
        default_candidates_with(range, self.candidates, self.span)
    }
}

/// Log-spaced candidate bandwidths between `span.0` and `span.1` of the
/// predictor range.
pub fn default_candidates_with(range: f64, count: usize, span: (f64, f64)) -> Vec<f64> {
    assert!(count >= 1 && span.0 > 0.0 && span.1 > span.0);
    if count == 1 {
        return vec![range * span.1];
    }
    let (lo, hi) = (range * span.0, range * span.1);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Ten log-spaced candidates between 5% and 50% of the range.
pub fn default_candidates(range: f64) -> Vec<f64> {
    default_candidates_with(range, 10, (0.05, 0.5))
}

/// Select a bandwidth for the regression of `y` on `x` by K-fold
/// cross-validated squared prediction error.
pub fn select_bandwidth_cv(
    x: &[f64],
    y: &[f64],
    degree: usize,
    candidates: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let design = Design::new(x, &[y]);
    select_bandwidth_cv_multi(&design, degree, candidates, folds, seed)
}

/// Multi-response variant: the CV score sums squared errors across
/// responses (for class indicators this is the Brier score).
pub(crate) fn select_bandwidth_cv_multi(
    design: &Design,
    degree: usize,
    candidates: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::Bandwidth("no candidate bandwidths supplied".into()));
    }
    let mut cands = candidates.to_vec();
    cands.sort_by(f64::total_cmp);
    if cands[0] <= 0.0 {
        return Err(Error::Bandwidth("candidate bandwidths must be positive".into()));
    }
    if cands.len() == 1 {
        return Ok(cands[0]);
    }
    let n = design.len();
    if n < 20 {
        return Err(Error::Bandwidth(format!("need at least 20 samples, got {n}")));
    }
    let folds = folds.max(2).min(n);

    // fold assignment over canonical sample order, shuffled by the seed
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::substream(seed, 0xc5));
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }

    let (lo, hi) = data_range(&design.x);
    let grid = default_grid(lo, hi, 101, 0.025);
    let n_resp = design.ys.len();

    // one task per (candidate, fold) cell
    let cells: Vec<(f64, usize, usize)> = exec::map_indexed(cands.len() * folds, |t| {
        score_cell(design, degree, &cands, folds, &fold_of, &grid, n_resp, t)
    });

    let per_candidate: Vec<&[(f64, usize, usize)]> = (0..cands.len())
        .map(|ci| &cells[ci * folds..(ci + 1) * folds])
        .collect();
    pick_candidate(&cands, &per_candidate)
        .ok_or_else(|| Error::Bandwidth("every candidate failed the local-data precondition".into()))
}

/// Smallest pooled score wins; any larger bandwidth whose paired
/// per-fold gap against the winner stays within one standard error of
/// that gap is treated as a tie and preferred.
fn pick_candidate(cands: &[f64], cells: &[&[(f64, usize, usize)]]) -> Option<f64> {
    let summaries: Vec<Option<CandidateScore>> =
        cells.iter().map(|c| summarize_candidate(c)).collect();
    let best_ci = summaries
        .iter()
        .enumerate()
        .filter_map(|(ci, s)| s.as_ref().map(|s| (ci, s.pooled)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?
        .0;
    let best_folds = &summaries[best_ci].as_ref().unwrap().fold_scores;

    let mut chosen = cands[best_ci];
    for (ci, summary) in summaries.iter().enumerate() {
        let Some(summary) = summary else { continue };
        if cands[ci] <= chosen {
            continue;
        }
        let diffs: Vec<f64> = summary
            .fold_scores
            .iter()
            .zip(best_folds)
            .filter_map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            })
            .collect();
        if diffs.len() < 2 {
            continue;
        }
        let k = diffs.len() as f64;
        let gap = diffs.iter().sum::<f64>() / k;
        let var = diffs.iter().map(|d| (d - gap) * (d - gap)).sum::<f64>() / (k - 1.0);
        let se = (var / k).sqrt();
        if gap <= se {
            chosen = cands[ci];
        }
    }
    Some(chosen)
}

struct CandidateScore {
    pooled: f64,
    fold_scores: Vec<Option<f64>>,
}

#[allow(clippy::too_many_arguments)]
fn score_cell(
    design: &Design,
    degree: usize,
    cands: &[f64],
    folds: usize,
    fold_of: &[usize],
    grid: &[f64],
    n_resp: usize,
    t: usize,
) -> (f64, usize, usize) {
    let n = design.len();
    let ci = t / folds;
    let fold = t % folds;
    let h = cands[ci];
    let counts: Vec<f64> = (0..n).map(|i| if fold_of[i] == fold { 0.0 } else { 1.0 }).collect();
    let fit = fit_multi(design, degree, h, grid, Some(&counts));
    let mut sse = 0.0;
    let mut scored = 0usize;
    let mut held = 0usize;
    for i in 0..n {
        if fold_of[i] != fold {
            continue;
        }
        held += 1;
        let mut sample_sse = 0.0;
        let mut ok = true;
        for r in 0..n_resp {
            match interp_curve(grid, &fit.values[r], &fit.valid, design.x[i]) {
                Some(pred) => sample_sse += (design.ys[r][i] - pred).powi(2),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            sse += sample_sse;
            scored += 1;
        }
    }
    (sse, scored, held)
}

/// Pooled score with per-fold scores; `None` when the candidate cannot
/// predict at least half its held-out points.
fn summarize_candidate(cells: &[(f64, usize, usize)]) -> Option<CandidateScore> {
    let mut sse = 0.0;
    let mut scored = 0usize;
    let mut held = 0usize;
    let mut fold_scores = Vec::with_capacity(cells.len());
    for &(s, c, t) in cells {
        sse += s;
        scored += c;
        held += t;
        fold_scores.push((c > 0).then(|| s / c as f64));
    }
    if scored * 2 < held || scored == 0 {
        return None;
    }
    Some(CandidateScore { pooled: sse / scored as f64, fold_scores })
}
