//! Causal-effect estimation with categorical `X` and real `Z` on `[0, 1]`.
//!
//! Pipeline: fit the class-probability curves of `X` given `Z` and the
//! conditional mean of `Y` given `Z`, take both derivative families on a
//! common grid, then regress the mean derivative on the probability
//! derivatives. The regression coefficient vector is the causal-effect
//! vector whenever the derivative curves are linearly independent.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::MixedDataset;
use crate::discrete_iv::{bootstrap_theta, ThetaEstimate};
use crate::error::{Error, Result};
use crate::linalg;
use crate::npreg::kernel::tricube;
use crate::npreg::{
    data_range, default_grid, fit_local_poly, fit_multiclass_probs, select_bandwidth_cv,
    CvOptions, ProbFit, RegressionFit,
};
use crate::npreg::bandwidth::select_bandwidth_cv_multi;
use crate::npreg::local_poly::Design;

/// Derivative curves stacked over the usable grid points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalSystem {
    pub grid: Vec<f64>,
    /// Row-major grid x n: derivative of each non-baseline class curve.
    pub a_curves: Vec<Vec<f64>>,
    pub b_curve: Vec<f64>,
    /// Nonnegative per-point weights.
    pub weights: Vec<f64>,
}

/// Both fitted curve families plus the estimated instrument density.
#[derive(Debug, Clone)]
pub struct SmoothCurves {
    pub mu: RegressionFit,
    pub probs: ProbFit,
    /// Estimated `Z` density at the grid points (mean one).
    pub z_density: Vec<f64>,
}

/// Estimation knobs. Defaults: degree-2 local fits on a 101-point grid
/// trimmed 2.5% per side, independent cross-validated bandwidths for the
/// two regressions, and density weighting of grid points.
#[derive(Debug, Clone)]
pub struct SmoothOptions {
    pub degree: usize,
    pub grid_points: usize,
    pub trim: f64,
    pub bandwidth_mu: Option<f64>,
    pub bandwidth_probs: Option<f64>,
    pub cv: CvOptions,
    pub density_weights: bool,
    pub rank_tol: f64,
    pub bootstrap: Option<usize>,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        Self {
            degree: 2,
            grid_points: 101,
            trim: 0.025,
            bandwidth_mu: None,
            bandwidth_probs: None,
            cv: CvOptions::default(),
            density_weights: true,
            rank_tol: 1e-8,
            bootstrap: None,
        }
    }
}

/// Linear-independence report for the derivative curves.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub effective_rank: usize,
    pub gram_cond: f64,
}

fn chosen_bandwidths(d: &MixedDataset, opts: &SmoothOptions) -> Result<(f64, f64)> {
    let range = {
        let (lo, hi) = data_range(&d.z);
        hi - lo
    };
    let candidates = opts.cv.build_candidates(range.max(1e-12));
    let h_mu = match opts.bandwidth_mu {
        Some(h) => h,
        None => select_bandwidth_cv(&d.z, &d.y, opts.degree, &candidates, opts.cv.folds, opts.cv.seed)?,
    };
    let h_probs = match opts.bandwidth_probs {
        Some(h) => h,
        None => {
            let indicators: Vec<Vec<f64>> = (0..=d.n)
                .map(|j| d.x.iter().map(|&c| (c == j) as i32 as f64).collect())
                .collect();
            let refs: Vec<&[f64]> = indicators.iter().map(Vec::as_slice).collect();
            let design = Design::new(&d.z, &refs);
            select_bandwidth_cv_multi(&design, opts.degree, &candidates, opts.cv.folds, opts.cv.seed)?
        }
    };
    Ok((h_mu, h_probs))
}

fn fit_curves_at(
    d: &MixedDataset,
    opts: &SmoothOptions,
    h_mu: f64,
    h_probs: f64,
) -> Result<SmoothCurves> {
    let (lo, hi) = data_range(&d.z);
    let grid = default_grid(lo, hi, opts.grid_points, opts.trim);
    let mu = fit_local_poly(&d.z, &d.y, opts.degree, h_mu, &grid)?;
    let probs = fit_multiclass_probs(&d.z, &d.x, d.n + 1, opts.degree, h_probs, &grid)?;
    let z_density = kde_mean_one(&d.z, &grid, h_mu);
    Ok(SmoothCurves { mu, probs, z_density })
}

/// Fit the two curve families with independently chosen bandwidths.
pub fn fit_curves(d: &MixedDataset, opts: &SmoothOptions) -> Result<SmoothCurves> {
    check_input(d)?;
    let (h_mu, h_probs) = chosen_bandwidths(d, opts)?;
    fit_curves_at(d, opts, h_mu, h_probs)
}

fn check_input(d: &MixedDataset) -> Result<()> {
    if d.len() < 20 {
        return Err(Error::TooFewValidPoints {
            got: d.len(),
            needed: 20,
            context: "smooth estimation".into(),
        });
    }
    Ok(())
}

/// Kernel density estimate at the grid points, scaled to mean one over
/// the grid (only relative weights matter downstream).
fn kde_mean_one(z: &[f64], grid: &[f64], bandwidth: f64) -> Vec<f64> {
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&g| {
            let lo = sorted.partition_point(|&v| v <= g - bandwidth);
            let hi = sorted.partition_point(|&v| v < g + bandwidth);
            sorted[lo..hi].iter().map(|&v| tricube((v - g) / bandwidth)).sum::<f64>()
        })
        .collect();
    let mean = density.iter().sum::<f64>() / density.len().max(1) as f64;
    if mean > 0.0 {
        for v in density.iter_mut() {
            *v /= mean;
        }
    }
    density
}

/// Stack the derivative curves into the functional system, dropping
/// masked grid points.
pub fn assemble_system(curves: &SmoothCurves, density_weights: bool) -> FunctionalSystem {
    let classes = curves.probs.classes();
    let mut grid = Vec::new();
    let mut a_curves = Vec::new();
    let mut b_curve = Vec::new();
    let mut weights = Vec::new();
    for gi in 0..curves.mu.grid.len() {
        if !curves.mu.valid[gi] || !curves.probs.valid[gi] {
            continue;
        }
        grid.push(curves.mu.grid[gi]);
        a_curves.push(curves.probs.dprobs[gi][1..classes].to_vec());
        b_curve.push(curves.mu.derivs[gi]);
        weights.push(if density_weights { curves.z_density[gi] } else { 1.0 });
    }
    FunctionalSystem { grid, a_curves, b_curve, weights }
}

/// One-call construction of the functional system from data.
pub fn build_functional_system(d: &MixedDataset, opts: &SmoothOptions) -> Result<FunctionalSystem> {
    Ok(assemble_system(&fit_curves(d, opts)?, opts.density_weights))
}

/// Effective rank and condition number of the weighted Gram matrix of
/// the derivative curves.
pub fn check_linear_independence(system: &FunctionalSystem, tol: f64) -> IndependenceReport {
    let n = system.a_curves.first().map_or(0, Vec::len);
    if n == 0 || system.grid.is_empty() {
        return IndependenceReport { effective_rank: 0, gram_cond: f64::INFINITY };
    }
    let mut gram = vec![vec![0.0; n]; n];
    for (row, &w) in system.a_curves.iter().zip(&system.weights) {
        for p in 0..n {
            for q in 0..n {
                gram[p][q] += w * row[p] * row[q];
            }
        }
    }
    let g = linalg::matrix_from_rows(&gram);
    let eig = nalgebra::SymmetricEigen::new(g);
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return IndependenceReport { effective_rank: 0, gram_cond: f64::INFINITY };
    }
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
    let effective_rank = eig.eigenvalues.iter().filter(|&&l| l > tol * max).count();
    let gram_cond = if min > 0.0 { max / min } else { f64::INFINITY };
    IndependenceReport { effective_rank, gram_cond }
}

/// Weighted least squares of the mean-derivative curve on the
/// probability-derivative curves.
pub fn fit_theta_functional(system: &FunctionalSystem) -> Result<ThetaEstimate> {
    fit_theta_functional_tol(system, 1e-8)
}

/// As [`fit_theta_functional`] with an explicit rank tolerance.
pub fn fit_theta_functional_tol(system: &FunctionalSystem, tol: f64) -> Result<ThetaEstimate> {
    let n = system.a_curves.first().map_or(0, Vec::len);
    if system.grid.len() < n.max(1) {
        return Err(Error::TooFewValidPoints {
            got: system.grid.len(),
            needed: n.max(1),
            context: "functional fit".into(),
        });
    }
    let indep = check_linear_independence(system, tol);
    let weighted_rows: Vec<Vec<f64>> = system
        .a_curves
        .iter()
        .zip(&system.weights)
        .map(|(row, &w)| row.iter().map(|a| a * w.sqrt()).collect())
        .collect();
    let weighted_b: Vec<f64> = system
        .b_curve
        .iter()
        .zip(&system.weights)
        .map(|(b, &w)| b * w.sqrt())
        .collect();
    let a = linalg::matrix_from_rows(&weighted_rows);
    if indep.effective_rank < n {
        return Err(Error::Underidentified {
            rank: indep.effective_rank,
            needed: n,
            null_basis: linalg::null_basis(&a, tol),
        });
    }
    let b = DVector::from_vec(weighted_b);
    let fit = linalg::svd_lstsq(&a, &b, tol);
    let residual_curve: Vec<f64> = system
        .a_curves
        .iter()
        .zip(&system.b_curve)
        .map(|(row, b)| b - row.iter().zip(&fit.solution).map(|(a, t)| a * t).sum::<f64>())
        .collect();
    let mut warnings = Vec::new();
    if indep.gram_cond > 1e6 {
        warnings.push(format!(
            "weak instrument: derivative-curve Gram condition number {:.3e}",
            indep.gram_cond
        ));
    }
    Ok(ThetaEstimate {
        theta: fit.solution,
        rank: indep.effective_rank,
        cond_number: indep.gram_cond,
        residual_norm: fit.residual_norm,
        boot_ci: None,
        boot_se: None,
        warnings,
        residual_curve: Some(residual_curve),
    })
}

/// Full pipeline with an optional row-resampling bootstrap. Bootstrap
/// refits reuse the bandwidths chosen on the original sample.
pub fn estimate(d: &MixedDataset, opts: &SmoothOptions, seed: u64) -> Result<ThetaEstimate> {
    check_input(d)?;
    let (h_mu, h_probs) = chosen_bandwidths(d, opts)?;
    let curves = fit_curves_at(d, opts, h_mu, h_probs)?;
    let mut point = fit_theta_functional_tol(&assemble_system(&curves, opts.density_weights), opts.rank_tol)?;
    for w in curves.mu.warnings.iter().chain(&curves.probs.warnings) {
        point.warnings.push(w.clone());
    }
    if let Some(reps) = opts.bootstrap {
        let (ci, se, failures) = bootstrap_theta(reps, seed, point.theta.len(), |rng| {
            let resampled = resample(d, rng);
            let curves = fit_curves_at(&resampled, opts, h_mu, h_probs)?;
            fit_theta_functional_tol(&assemble_system(&curves, opts.density_weights), opts.rank_tol)
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

fn resample(d: &MixedDataset, rng: &mut impl rand::Rng) -> MixedDataset {
    let n = d.len();
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        y.push(d.y[i]);
        x.push(d.x[i]);
        z.push(d.z[i]);
    }
    MixedDataset { y, x, z, n: d.n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn system(a: Vec<Vec<f64>>, b: Vec<f64>) -> FunctionalSystem {
        let g = b.len();
        FunctionalSystem {
            grid: (0..g).map(|i| i as f64 / g as f64).collect(),
            a_curves: a,
            b_curve: b,
            weights: vec![1.0; g],
        }
    }

    #[test]
    fn constant_curves_solve_exactly() {
        let sys = system(vec![vec![0.5]; 40], vec![1.5; 40]);
        let est = fit_theta_functional(&sys).unwrap();
        assert_relative_eq!(est.theta[0], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_b_gives_zero_theta() {
        let sys = system(vec![vec![0.7]; 30], vec![0.0; 30]);
        let est = fit_theta_functional(&sys).unwrap();
        assert_relative_eq!(est.theta[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_checks_on_dependent_curves() {
        // a2 = 2 a1 everywhere
        let a: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let v = 0.3 + 0.01 * i as f64;
                vec![v, 2.0 * v]
            })
            .collect();
        let sys = system(a, vec![1.0; 50]);
        let report = check_linear_independence(&sys, 1e-8);
        assert_eq!(report.effective_rank, 1);
        assert!(matches!(
            fit_theta_functional(&sys),
            Err(Error::Underidentified { rank: 1, needed: 2, .. })
        ));
    }

    #[test]
    fn monomial_curves_are_independent() {
        let a: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let z = i as f64 / 49.0;
                vec![1.0, z]
            })
            .collect();
        let sys = system(a, vec![0.0; 50]);
        assert_eq!(check_linear_independence(&sys, 1e-8).effective_rank, 2);
    }

    #[test]
    fn constant_single_curve_has_rank_one() {
        let sys = system(vec![vec![0.5]; 25], vec![1.0; 25]);
        assert_eq!(check_linear_independence(&sys, 1e-8).effective_rank, 1);
    }

    #[test]
    fn adding_all_zero_grid_point_changes_nothing() {
        let mut a: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![0.4 + 0.002 * i as f64])
            .collect();
        let mut b: Vec<f64> = a.iter().map(|row| 2.0 * row[0]).collect();
        let base = fit_theta_functional(&system(a.clone(), b.clone())).unwrap();
        a.push(vec![0.0]);
        b.push(0.0);
        let extended = fit_theta_functional(&system(a, b)).unwrap();
        assert_relative_eq!(base.theta[0], extended.theta[0], epsilon = 1e-12);
    }

    #[test]
    fn exact_two_component_recovery() {
        // b = 2 a1 - 1 a2 with independent curves
        let a: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let z = i as f64 / 59.0;
                vec![0.5 + z, z * z]
            })
            .collect();
        let b: Vec<f64> = a.iter().map(|row| 2.0 * row[0] - row[1]).collect();
        let est = fit_theta_functional(&system(a, b)).unwrap();
        assert_relative_eq!(est.theta[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(est.theta[1], -1.0, epsilon = 1e-10);
    }
}
