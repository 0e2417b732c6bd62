//! Causal-effect estimation with categorical `X` and `Z`.
//!
//! For an unordered pair of instrument levels `{i, k}`, the contrast of
//! conditional means of `Y` equals the contrast of conditional choice
//! probabilities weighted by the effect vector, provided outcome
//! differences are uncorrelated with choice changes. Stacking contrasts
//! over a pair set gives `A theta = b`; the estimator checks the rank of
//! `A` and solves by least squares.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::{group_stats, DiscreteDataset, GroupStats};
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg;
use crate::rng;

/// Unordered pairs of instrument levels (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pub pairs: Vec<(usize, usize)>,
}

impl PairSet {
    /// All `m (m - 1) / 2` pairs.
    pub fn all_pairs(m: usize) -> Self {
        let mut pairs = Vec::new();
        for i in 0..m {
            for k in (i + 1)..m {
                pairs.push((i, k));
            }
        }
        Self { pairs }
    }

    /// The spanning subset pairing level 0 with every other level.
    pub fn spanning(m: usize) -> Self {
        Self { pairs: (1..m).map(|k| (0, k)).collect() }
    }

    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let set = Self { pairs };
        set.check_distinct()?;
        Ok(set)
    }

    fn check_distinct(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &(i, k) in &self.pairs {
            if i == k {
                return Err(Error::InvalidParam(format!("pair ({i}, {k}) repeats a level")));
            }
            let key = (i.min(k), i.max(k));
            if !seen.insert(key) {
                return Err(Error::InvalidParam(format!("duplicate pair ({i}, {k})")));
            }
        }
        Ok(())
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        self.check_distinct()?;
        if self.pairs.is_empty() {
            return Err(Error::InvalidParam("pair set is empty".into()));
        }
        for &(i, k) in &self.pairs {
            if i >= m || k >= m {
                return Err(Error::InvalidParam(format!(
                    "pair ({i}, {k}) references a level outside 0..{m}"
                )));
            }
        }
        Ok(())
    }
}

/// Stacked contrast system `A theta = b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastSystem {
    /// Row-major |pairs| x n.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub pair_labels: Vec<(usize, usize)>,
    /// Standard error scale of each `b` entry, when built from data.
    pub noise_scale: Option<Vec<f64>>,
}

/// Estimated effect vector with solve diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta: Vec<f64>,
    pub rank: usize,
    pub cond_number: f64,
    pub residual_norm: f64,
    /// Percentile bootstrap intervals, one `(lo, hi)` per component.
    pub boot_ci: Option<Vec<(f64, f64)>>,
    /// Bootstrap standard errors.
    pub boot_se: Option<Vec<f64>>,
    pub warnings: Vec<String>,
    /// Residual at each fitted grid point or contrast row, for
    /// diagnostics.
    pub residual_curve: Option<Vec<f64>>,
}

/// Rank report of a contrast system.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub cond_number: f64,
}

/// Assemble the contrast system over `s0` from grouped statistics.
/// Every level a pair touches must have observations.
pub fn build_contrasts(stats: &GroupStats, s0: &PairSet) -> Result<ContrastSystem> {
    s0.validate(stats.m)?;
    for &(i, k) in &s0.pairs {
        if stats.group_counts[i] == 0 || stats.group_counts[k] == 0 {
            return Err(Error::EmptyGroupInPair { i, k });
        }
    }
    let n = stats.n;
    let mut a = Vec::with_capacity(s0.pairs.len());
    let mut b = Vec::with_capacity(s0.pairs.len());
    let mut noise = Vec::with_capacity(s0.pairs.len());
    for &(i, k) in &s0.pairs {
        let row: Vec<f64> = (1..=n)
            .map(|j| stats.cond_prob_x[i][j] - stats.cond_prob_x[k][j])
            .collect();
        a.push(row);
        b.push(stats.cond_mean_y[i] - stats.cond_mean_y[k]);
        let var_i = positive_or_zero(stats.cond_var_y[i]) / stats.group_counts[i] as f64;
        let var_k = positive_or_zero(stats.cond_var_y[k]) / stats.group_counts[k] as f64;
        noise.push((var_i + var_k).sqrt());
    }
    Ok(ContrastSystem {
        a,
        b,
        pair_labels: s0.pairs.clone(),
        noise_scale: Some(noise),
    })
}

fn positive_or_zero(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Numerical rank and condition number of the contrast matrix at a
/// relative singular-value threshold.
pub fn check_rank(system: &ContrastSystem, tol: f64) -> RankReport {
    let a = linalg::matrix_from_rows(&system.a);
    let (rank, cond_number) = linalg::rank_and_cond(&a, tol);
    RankReport { rank, cond_number }
}

/// Least-squares solve of the contrast system. Underidentification
/// (rank below the number of effect components) is an error carrying a
/// basis of the unidentified directions.
pub fn solve_theta(system: &ContrastSystem, tol: f64) -> Result<ThetaEstimate> {
    let n = system.a.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::InvalidParam("contrast system has no effect columns".into()));
    }
    let a = linalg::matrix_from_rows(&system.a);
    let b = DVector::from_vec(system.b.clone());
    let fit = linalg::svd_lstsq(&a, &b, tol);
    if fit.rank < n {
        return Err(Error::Underidentified {
            rank: fit.rank,
            needed: n,
            null_basis: linalg::null_basis(&a, tol),
        });
    }
    let mut warnings = Vec::new();
    if fit.cond > 1e6 {
        warnings.push(format!(
            "weak instrument: contrast matrix condition number {:.3e}",
            fit.cond
        ));
    }
    // With more contrasts than unknowns, a residual far above the
    // sampling noise of b signals that a single effect vector does not
    // explain every contrast.
    if system.b.len() > n {
        if let Some(noise) = &system.noise_scale {
            let noise_norm: f64 = noise.iter().map(|s| s * s).sum::<f64>().sqrt();
            if noise_norm > 0.0 && fit.residual_norm > 5.0 * noise_norm {
                warnings.push(format!(
                    "model misfit: residual norm {:.3e} exceeds 5x the sampling scale {:.3e}",
                    fit.residual_norm, noise_norm
                ));
            }
        }
    }
    let x = DVector::from_vec(fit.solution.clone());
    let residual_curve: Vec<f64> = (&a * &x - &b).iter().copied().collect();
    Ok(ThetaEstimate {
        theta: fit.solution,
        rank: fit.rank,
        cond_number: fit.cond,
        residual_norm: fit.residual_norm,
        boot_ci: None,
        boot_se: None,
        warnings,
        residual_curve: Some(residual_curve),
    })
}

/// Options for the end-to-end estimator.
#[derive(Debug, Clone)]
pub struct DiscreteOptions {
    /// `None` uses all pairs; the spanning subset avoids redundant rows.
    pub pairs: Option<PairSet>,
    pub rank_tol: f64,
    /// Weight each contrast row by the inverse sampling standard error
    /// of its `b` entry. Off by default: the unweighted system is the
    /// identification equation itself.
    pub inverse_variance_weights: bool,
    /// Bootstrap replication count for percentile intervals.
    pub bootstrap: Option<usize>,
}

impl Default for DiscreteOptions {
    fn default() -> Self {
        Self {
            pairs: None,
            rank_tol: 1e-8,
            inverse_variance_weights: false,
            bootstrap: None,
        }
    }
}

/// Default bootstrap replication count.
pub const DEFAULT_BOOTSTRAP: usize = 500;

fn estimate_once(d: &DiscreteDataset, opts: &DiscreteOptions) -> Result<ThetaEstimate> {
    if d.is_empty() {
        return Err(Error::InvalidParam("dataset is empty".into()));
    }
    let stats = group_stats(d)?;
    let pairs = match &opts.pairs {
        Some(p) => p.clone(),
        None => PairSet::all_pairs(d.m),
    };
    let mut system = build_contrasts(&stats, &pairs)?;
    if opts.inverse_variance_weights {
        apply_inverse_variance_weights(&mut system);
    }
    solve_theta(&system, opts.rank_tol)
}

fn apply_inverse_variance_weights(system: &mut ContrastSystem) {
    let Some(noise) = system.noise_scale.clone() else {
        return;
    };
    let floor = noise
        .iter()
        .copied()
        .filter(|&s| s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return;
    }
    for (row, (b, s)) in system
        .a
        .iter_mut()
        .zip(system.b.iter_mut().zip(&noise))
    {
        let w = 1.0 / s.max(floor * 1e-3);
        for a in row.iter_mut() {
            *a *= w;
        }
        *b *= w;
    }
    system.noise_scale = Some(vec![1.0; noise.len()]);
}

/// Full pipeline: grouped statistics, contrasts, rank check, solve, and
/// an optional row-resampling bootstrap with percentile intervals.
pub fn estimate(
    d: &DiscreteDataset,
    opts: &DiscreteOptions,
    seed: u64,
) -> Result<ThetaEstimate> {
    let mut point = estimate_once(d, opts)?;
    if let Some(reps) = opts.bootstrap {
        let (ci, se, failures) = bootstrap_theta(reps, seed, point.theta.len(), |rng| {
            let resampled = d.resample(rng);
            estimate_once(&resampled, &DiscreteOptions { bootstrap: None, ..opts.clone() })
                .map(|e| e.theta)
        });
        if failures * 5 > reps {
            point
                .warnings
                .push(format!("bootstrap: {failures} of {reps} replicates failed"));
        }
        point.boot_ci = ci;
        point.boot_se = se;
    }
    Ok(point)
}

/// Shared percentile-bootstrap driver: runs `refit` on per-replicate
/// substreams and summarizes component-wise intervals and standard
/// errors. Returns `(ci, se, failure_count)`.
pub(crate) fn bootstrap_theta<F>(
    reps: usize,
    seed: u64,
    dim: usize,
    refit: F,
) -> (Option<Vec<(f64, f64)>>, Option<Vec<f64>>, usize)
where
    F: Fn(&mut rng::Stream) -> Result<Vec<f64>> + Sync + Send,
{
    let draws: Vec<Option<Vec<f64>>> = exec::map_indexed(reps, |r| {
        let mut stream = rng::substream(seed, 1 + r as u64);
        refit(&mut stream).ok()
    });
    let ok: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    let failures = reps - ok.len();
    if ok.len() < 10 {
        return (None, None, failures);
    }
    let mut ci = Vec::with_capacity(dim);
    let mut se = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut vals: Vec<f64> = ok.iter().map(|t| t[j]).collect();
        vals.sort_by(f64::total_cmp);
        ci.push((percentile(&vals, 0.025), percentile(&vals, 0.975)));
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (vals.len() - 1) as f64;
        se.push(var.sqrt());
    }
    (Some(ci), Some(se), failures)
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let t = pos - lo as f64;
        sorted[lo] * (1.0 - t) + sorted[hi] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stats_for(probs: Vec<Vec<f64>>, means: Vec<f64>) -> GroupStats {
        let m = means.len();
        let n = probs[0].len() - 1;
        GroupStats {
            cond_mean_y: means,
            cond_var_y: vec![1.0; m],
            cond_prob_x: probs,
            group_counts: vec![100; m],
            empty_levels: vec![],
            n,
            m,
        }
    }

    #[test]
    fn perfect_compliance_gives_unit_contrast() {
        let stats = stats_for(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![3.0, 1.0]);
        // pair (0, 1): P(X=1|Z=0) - P(X=1|Z=1) = 1, b = 3 - 1 = 2
        let system = build_contrasts(&stats, &PairSet::all_pairs(2)).unwrap();
        assert_eq!(system.a, vec![vec![1.0]]);
        assert_relative_eq!(system.b[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn identical_conditionals_give_zero_matrix() {
        let stats = stats_for(
            vec![vec![0.6, 0.4], vec![0.6, 0.4], vec![0.6, 0.4]],
            vec![1.0, 1.0, 1.0],
        );
        let system = build_contrasts(&stats, &PairSet::all_pairs(3)).unwrap();
        assert!(system.a.iter().all(|row| row.iter().all(|&v| v == 0.0)));
        let report = check_rank(&system, 1e-8);
        assert_eq!(report.rank, 0);
    }

    #[test]
    fn pair_touching_empty_group_is_an_error() {
        let mut stats = stats_for(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![3.0, 1.0]);
        stats.group_counts[1] = 0;
        let err = build_contrasts(&stats, &PairSet::all_pairs(2)).unwrap_err();
        assert!(matches!(err, Error::EmptyGroupInPair { i: 0, k: 1 }));
    }

    #[test]
    fn rank_of_duplicate_rows_is_one_and_solvable() {
        let system = ContrastSystem {
            a: vec![vec![1.0], vec![1.0]],
            b: vec![2.0, 2.0],
            pair_labels: vec![(0, 1), (0, 2)],
            noise_scale: None,
        };
        let report = check_rank(&system, 1e-8);
        assert_eq!(report.rank, 1);
        let est = solve_theta(&system, 1e-8).unwrap();
        assert_relative_eq!(est.theta[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn one_equation_ratio() {
        let system = ContrastSystem {
            a: vec![vec![0.5]],
            b: vec![1.0],
            pair_labels: vec![(0, 1)],
            noise_scale: None,
        };
        let est = solve_theta(&system, 1e-8).unwrap();
        assert_relative_eq!(est.theta[0], 2.0, epsilon = 1e-12);
        assert_eq!(est.rank, 1);
    }

    #[test]
    fn underidentified_solve_reports_null_directions() {
        let system = ContrastSystem {
            // column 2 = 2 x column 1
            a: vec![vec![0.2, 0.4], vec![0.1, 0.2]],
            b: vec![1.0, 0.5],
            pair_labels: vec![(0, 1), (0, 2)],
            noise_scale: None,
        };
        match solve_theta(&system, 1e-8) {
            Err(Error::Underidentified { rank, needed, null_basis }) => {
                assert_eq!(rank, 1);
                assert_eq!(needed, 2);
                assert_eq!(null_basis.len(), 1);
            }
            other => panic!("expected underidentification, got {other:?}"),
        }
    }

    #[test]
    fn pair_set_monotonicity_never_loses_rank() {
        let stats = stats_for(
            vec![vec![0.8, 0.2], vec![0.5, 0.5], vec![0.1, 0.9]],
            vec![0.0, 1.0, 2.0],
        );
        let spanning = build_contrasts(&stats, &PairSet::spanning(3)).unwrap();
        let all = build_contrasts(&stats, &PairSet::all_pairs(3)).unwrap();
        assert!(check_rank(&all, 1e-8).rank >= check_rank(&spanning, 1e-8).rank);
    }

    #[test]
    fn duplicate_pairs_are_rejected() {
        assert!(PairSet::new(vec![(0, 1), (1, 0)]).is_err());
        assert!(PairSet::new(vec![(2, 2)]).is_err());
    }
}
