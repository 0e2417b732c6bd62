//! Causal-effect estimation with real-valued `X` and `Z`.
//!
//! The identified object is the curve `phi(z) = E(dY/dX | Z = z)`,
//! solved pointwise from derivative estimates of the conditional means:
//! scalar case `a(z) phi(z) = b(z)` with `a = d/dz E(X|z)`,
//! `b = d/dz E(Y|z)`; vector case the analogous per-point least-squares
//! system. `phi` alone does not pin down the pointwise effect
//! `theta(x)`; two structures that do are covered here: an additive
//! outcome (solve the first-kind integral system for `s'`) and a random
//! slope independent of `X` (average `phi` over the instrument sample).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::ContinuousDataset;
use crate::discrete_iv::bootstrap_theta;
use crate::error::{Error, Result};
use crate::linalg;
use crate::npreg::bandwidth::select_bandwidth_cv_multi;
use crate::npreg::density::CondDensityKernel;
use crate::npreg::local_poly::{fit_local_linear_nd, fit_multi, Design};
use crate::npreg::{data_range, default_grid, CvOptions};

/// Why a grid point is usable or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Validity {
    Valid,
    /// `|a(z)|` too small relative to the curve maximum (scalar case).
    WeakDenominator,
    /// Per-point coefficient matrix below full column rank (vector case).
    RankDeficient,
    /// The underlying regression masked this point (sparse window).
    Boundary,
}

impl Validity {
    pub fn is_valid(self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// The identified curve on a grid, with the per-point systems kept for
/// diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiCurve {
    /// Grid rows (length `z_dim` each; scalar case uses length 1).
    pub grid: Vec<Vec<f64>>,
    /// Per-point effect vector (length `x_dim`; NaN where invalid).
    pub phi: Vec<Vec<f64>>,
    pub valid: Vec<Validity>,
    /// Row-major `z_dim x x_dim` coefficient matrix per point.
    pub a_vals: Vec<Vec<f64>>,
    /// Right-hand side per point (length `z_dim`).
    pub b_vals: Vec<Vec<f64>>,
    pub x_dim: usize,
    pub z_dim: usize,
    /// Bandwidths used per `z` coordinate.
    pub bandwidths: Vec<f64>,
    pub warnings: Vec<String>,
}

impl PhiCurve {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| v.is_valid()).count()
    }

    /// Scalar grid values (z_dim must be 1).
    pub fn grid_scalar(&self) -> Vec<f64> {
        self.grid.iter().map(|r| r[0]).collect()
    }

    /// Scalar phi values (x_dim must be 1).
    pub fn phi_scalar(&self) -> Vec<f64> {
        self.phi.iter().map(|r| r[0]).collect()
    }
}

/// Estimated integrand derivative for the additive-outcome structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SprimeCurve {
    pub x_grid: Vec<f64>,
    pub sprime: Vec<f64>,
    pub lambda: f64,
    pub residual_norm: f64,
    /// Roughness seminorm of the solution (first differences).
    pub solution_norm: f64,
    /// The `(lambda, residual, seminorm)` sweep behind the corner pick.
    pub lcurve: Vec<(f64, f64, f64)>,
}

/// Averaged effect for the random-slope structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEffect {
    pub theta: f64,
    /// Fraction of samples dropped for falling in invalid curve regions.
    pub dropped_fraction: f64,
    /// Interpolated `phi` at each kept sample, the raw material for
    /// resampling-based uncertainty.
    pub phi_at_samples: Vec<f64>,
}

/// Constant-effect estimate with bootstrap uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEffectEstimate {
    pub theta: f64,
    pub boot_se: Option<f64>,
    pub boot_ci: Option<(f64, f64)>,
    pub dropped_fraction: f64,
    pub warnings: Vec<String>,
}

/// Slopes behind the classic single-instrument ratio.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinearIvFit {
    pub beta_hat: f64,
    pub slope_yz: f64,
    pub slope_xz: f64,
}

/// Estimation knobs for the continuous regime.
#[derive(Debug, Clone)]
pub struct ContinuousOptions {
    /// Local fit degree for the scalar case (degree 2 keeps value and
    /// derivative in one fit).
    pub degree: usize,
    pub grid_points: usize,
    pub trim: f64,
    /// Shared bandwidth for the scalar-case fits of `Y` and `X` on `Z`;
    /// `None` cross-validates on variance-standardized responses.
    pub bandwidth: Option<f64>,
    /// Per-coordinate bandwidths for the vector case; `None` uses
    /// half of each coordinate range.
    pub bandwidths_nd: Option<Vec<f64>>,
    /// Tensor grid resolution per coordinate for `z_dim <= 2`.
    pub tensor_points: usize,
    /// Caller-supplied grid rows, required for `z_dim > 2`.
    pub grid_rows: Option<Vec<Vec<f64>>>,
    pub cv: CvOptions,
    /// Relative weak-denominator threshold (scalar case).
    pub denom_tol: f64,
    pub rank_tol: f64,
}

impl Default for ContinuousOptions {
    fn default() -> Self {
        Self {
            degree: 2,
            grid_points: 101,
            trim: 0.025,
            bandwidth: None,
            bandwidths_nd: None,
            tensor_points: 21,
            grid_rows: None,
            cv: CvOptions::default(),
            denom_tol: 0.1,
            rank_tol: 1e-8,
        }
    }
}

const MIN_VALID_POINTS: usize = 10;

// ---------------------------------------------------------------------------
// Pointwise solves
// ---------------------------------------------------------------------------

/// Solve `a(z) phi(z) = b(z)` point by point from given curves. This is
/// the identification step in isolation, usable with analytic curves.
///
/// Scalar systems mask points where `|a|` falls below `denom_tol` times
/// the largest valid `|a|`; larger systems mask points whose coefficient
/// matrix drops below full column rank at `rank_tol`.
pub fn phi_from_curves(
    grid: Vec<Vec<f64>>,
    a_vals: Vec<Vec<f64>>,
    b_vals: Vec<Vec<f64>>,
    x_dim: usize,
    z_dim: usize,
    denom_tol: f64,
    rank_tol: f64,
) -> PhiCurve {
    let points = grid.len();
    let mut phi = vec![vec![f64::NAN; x_dim]; points];
    let mut valid = vec![Validity::Valid; points];

    if x_dim == 1 && z_dim == 1 {
        let max_a = a_vals
            .iter()
            .zip(&valid)
            .filter(|(a, v)| v.is_valid() && a[0].is_finite())
            .map(|(a, _)| a[0].abs())
            .fold(0.0_f64, f64::max);
        for gi in 0..points {
            let a = a_vals[gi][0];
            let b = b_vals[gi][0];
            if !a.is_finite() || !b.is_finite() {
                valid[gi] = Validity::Boundary;
            } else if a.abs() <= denom_tol * max_a || a == 0.0 {
                valid[gi] = Validity::WeakDenominator;
            } else {
                phi[gi][0] = b / a;
            }
        }
    } else {
        for gi in 0..points {
            if a_vals[gi].iter().any(|v| !v.is_finite())
                || b_vals[gi].iter().any(|v| !v.is_finite())
            {
                valid[gi] = Validity::Boundary;
                continue;
            }
            let a = DMatrix::from_fn(z_dim, x_dim, |i, j| a_vals[gi][i * x_dim + j]);
            let b = DVector::from_vec(b_vals[gi].clone());
            let fit = linalg::svd_lstsq(&a, &b, rank_tol);
            if fit.rank < x_dim {
                valid[gi] = Validity::RankDeficient;
            } else {
                phi[gi] = fit.solution;
            }
        }
    }

    PhiCurve {
        grid,
        phi,
        valid,
        a_vals,
        b_vals,
        x_dim,
        z_dim,
        bandwidths: vec![],
        warnings: vec![],
    }
}

// ---------------------------------------------------------------------------
// Scalar estimation
// ---------------------------------------------------------------------------

fn scalar_bandwidth(z: &[f64], y: &[f64], x: &[f64], opts: &ContinuousOptions) -> Result<f64> {
    if let Some(h) = opts.bandwidth {
        if h <= 0.0 {
            return Err(Error::InvalidParam("bandwidth must be positive".into()));
        }
        return Ok(h);
    }
    let sd = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / v.len() as f64)
            .sqrt()
            .max(1e-12)
    };
    let (sy, sx) = (sd(y), sd(x));
    let ys: Vec<f64> = y.iter().map(|v| v / sy).collect();
    let xs: Vec<f64> = x.iter().map(|v| v / sx).collect();
    let design = Design::new(z, &[&ys, &xs]);
    let (lo, hi) = data_range(z);
    let candidates = opts.cv.build_candidates((hi - lo).max(1e-12));
    select_bandwidth_cv_multi(&design, opts.degree, &candidates, opts.cv.folds, opts.cv.seed)
}

fn estimate_phi_scalar_at(
    d: &ContinuousDataset,
    opts: &ContinuousOptions,
    bandwidth: f64,
) -> Result<PhiCurve> {
    let z = d.z_col(0);
    let x = d.x_col(0);
    let (lo, hi) = data_range(&z);
    let grid = default_grid(lo, hi, opts.grid_points, opts.trim);
    let design = Design::new(&z, &[&d.y, &x]);
    let fit = fit_multi(&design, opts.degree, bandwidth, &grid, None);

    let a_vals: Vec<Vec<f64>> = (0..grid.len()).map(|gi| vec![fit.derivs[1][gi]]).collect();
    let b_vals: Vec<Vec<f64>> = (0..grid.len()).map(|gi| vec![fit.derivs[0][gi]]).collect();
    let grid_rows: Vec<Vec<f64>> = grid.iter().map(|&g| vec![g]).collect();
    let mut curve = phi_from_curves(grid_rows, a_vals, b_vals, 1, 1, opts.denom_tol, opts.rank_tol);
    curve.bandwidths = vec![bandwidth];
    let masked = curve.valid.iter().filter(|v| !v.is_valid()).count();
    if masked > 0 {
        curve
            .warnings
            .push(format!("{masked} of {} grid points unusable", grid.len()));
    }
    if curve.valid_count() < MIN_VALID_POINTS {
        return Err(Error::TooFewValidPoints {
            got: curve.valid_count(),
            needed: MIN_VALID_POINTS,
            context: "phi curve".into(),
        });
    }
    Ok(curve)
}

/// Scalar-instrument curve estimate: derivatives of the fits of `Y` and
/// `X` on `Z` share one window per grid point, and `phi` is their ratio
/// where the denominator is healthy.
pub fn estimate_phi_scalar(d: &ContinuousDataset, opts: &ContinuousOptions) -> Result<PhiCurve> {
    if d.x_dim != 1 || d.z_dim != 1 {
        return Err(Error::RegimeMismatch(format!(
            "scalar phi needs 1-dimensional x and z, got {} and {}",
            d.x_dim, d.z_dim
        )));
    }
    if d.len() < 50 {
        return Err(Error::TooFewValidPoints {
            got: d.len(),
            needed: 50,
            context: "scalar phi estimation".into(),
        });
    }
    let z = d.z_col(0);
    let x = d.x_col(0);
    let h = scalar_bandwidth(&z, &d.y, &x, opts)?;
    estimate_phi_scalar_at(d, opts, h)
}

// ---------------------------------------------------------------------------
// Vector estimation
// ---------------------------------------------------------------------------

/// Vector-instrument curve estimate. At each grid row the local-linear
/// fit of `Y` and every `X_j` on all `Z` coordinates yields the partial
/// derivatives forming the per-point system; `n = m = 1` delegates to
/// the scalar path so the two agree exactly.
pub fn estimate_phi_vector(d: &ContinuousDataset, opts: &ContinuousOptions) -> Result<PhiCurve> {
    if d.x_dim == 1 && d.z_dim == 1 {
        return estimate_phi_scalar(d, opts);
    }
    if d.z_dim < d.x_dim {
        return Err(Error::RegimeMismatch(format!(
            "need at least as many instrument as treatment coordinates, got {} < {}",
            d.z_dim, d.x_dim
        )));
    }
    if d.len() < 200 {
        return Err(Error::TooFewValidPoints {
            got: d.len(),
            needed: 200,
            context: "vector phi estimation".into(),
        });
    }
    let grid_rows = match (&opts.grid_rows, d.z_dim) {
        (Some(rows), _) => rows.clone(),
        (None, dim) if dim <= 2 => tensor_grid(d, opts.tensor_points, opts.trim),
        _ => {
            return Err(Error::InvalidParam(
                "supply grid_rows for more than two instrument coordinates".into(),
            ))
        }
    };
    let bandwidths = match &opts.bandwidths_nd {
        Some(b) => {
            if b.len() != d.z_dim || b.iter().any(|&h| h <= 0.0) {
                return Err(Error::InvalidParam(
                    "need one positive bandwidth per instrument coordinate".into(),
                ));
            }
            b.clone()
        }
        None => (0..d.z_dim)
            .map(|j| {
                let col = d.z_col(j);
                let (lo, hi) = data_range(&col);
                0.5 * (hi - lo).max(1e-12)
            })
            .collect(),
    };

    let x_cols: Vec<Vec<f64>> = (0..d.x_dim).map(|j| d.x_col(j)).collect();
    let mut responses: Vec<&[f64]> = vec![&d.y];
    responses.extend(x_cols.iter().map(Vec::as_slice));
    let fit = fit_local_linear_nd(&d.z, d.z_dim, &responses, &bandwidths, &grid_rows);

    let mut a_vals = Vec::with_capacity(grid_rows.len());
    let mut b_vals = Vec::with_capacity(grid_rows.len());
    for gi in 0..grid_rows.len() {
        if fit.valid[gi] {
            let mut a = vec![0.0; d.z_dim * d.x_dim];
            for i in 0..d.z_dim {
                for j in 0..d.x_dim {
                    a[i * d.x_dim + j] = fit.grads[1 + j][gi][i];
                }
            }
            a_vals.push(a);
            b_vals.push(fit.grads[0][gi].clone());
        } else {
            a_vals.push(vec![f64::NAN; d.z_dim * d.x_dim]);
            b_vals.push(vec![f64::NAN; d.z_dim]);
        }
    }
    let mut curve = phi_from_curves(
        grid_rows,
        a_vals,
        b_vals,
        d.x_dim,
        d.z_dim,
        opts.denom_tol,
        opts.rank_tol,
    );
    curve.bandwidths = bandwidths;
    if curve.valid_count() < MIN_VALID_POINTS {
        return Err(Error::TooFewValidPoints {
            got: curve.valid_count(),
            needed: MIN_VALID_POINTS,
            context: "phi curve".into(),
        });
    }
    Ok(curve)
}

fn tensor_grid(d: &ContinuousDataset, points: usize, trim: f64) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..d.z_dim)
        .map(|j| {
            let col = d.z_col(j);
            let (lo, hi) = data_range(&col);
            default_grid(lo, hi, points, trim)
        })
        .collect();
    let mut rows = Vec::new();
    if d.z_dim == 1 {
        for &a in &axes[0] {
            rows.push(vec![a]);
        }
    } else {
        for &a in &axes[0] {
            for &b in &axes[1] {
                rows.push(vec![a, b]);
            }
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// Integral-equation recovery of s'
// ---------------------------------------------------------------------------

/// Solve the discretized first-kind system `Q s' ~ phi` by ridge
/// regularization with a first-difference roughness penalty, where `Q`
/// is the quadrature-weighted transpose of the conditional density
/// kernel. `lambda = None` picks the corner of the L-curve over a
/// 20-point logarithmic sweep.
pub fn recover_sprime(
    phi: &PhiCurve,
    kernel: &CondDensityKernel,
    lambda: Option<f64>,
) -> Result<SprimeCurve> {
    if phi.x_dim != 1 || phi.z_dim != 1 {
        return Err(Error::InvalidParam("integrand recovery needs a scalar phi curve".into()));
    }
    if let Some(l) = lambda {
        if !(l > 0.0) {
            return Err(Error::InvalidParam(format!("lambda must be positive, got {l}")));
        }
    }
    // valid phi points must line up with the kernel's z grid
    let valid_idx: Vec<usize> = (0..phi.grid.len())
        .filter(|&i| phi.valid[i].is_valid())
        .collect();
    if valid_idx.len() != kernel.z_grid.len() {
        return Err(Error::GridMismatch(format!(
            "kernel has {} z columns but the curve has {} valid points",
            kernel.z_grid.len(),
            valid_idx.len()
        )));
    }
    for (col, &pi) in valid_idx.iter().enumerate() {
        if (phi.grid[pi][0] - kernel.z_grid[col]).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "z grids disagree at column {col}: {} vs {}",
                kernel.z_grid[col], phi.grid[pi][0]
            )));
        }
    }

    let usable: Vec<usize> = (0..kernel.z_grid.len())
        .filter(|&j| kernel.valid_cols[j])
        .collect();
    if usable.len() < MIN_VALID_POINTS {
        return Err(Error::TooFewValidPoints {
            got: usable.len(),
            needed: MIN_VALID_POINTS,
            context: "usable kernel columns".into(),
        });
    }

    let nx = kernel.x_grid.len();
    let q = DMatrix::from_fn(usable.len(), nx, |r, i| {
        kernel.x_weights[i] * kernel.k[i][usable[r]]
    });
    let rhs = DVector::from_fn(usable.len(), |r, _| phi.phi[valid_idx[usable[r]]][0]);
    let mut diff = DMatrix::zeros(nx - 1, nx);
    for i in 0..nx - 1 {
        diff[(i, i)] = -1.0;
        diff[(i, i + 1)] = 1.0;
    }

    let sigma_sq = {
        let sv = q.clone().singular_values();
        let s = sv.max();
        s * s
    };
    let (chosen, lcurve) = match lambda {
        Some(l) => (l, vec![]),
        None => {
            let sweep: Vec<f64> = (0..20)
                .map(|k| sigma_sq * 1e-7 * (1e8_f64).powf(k as f64 / 19.0))
                .collect();
            let pts: Vec<(f64, f64, f64)> = sweep
                .iter()
                .map(|&l| {
                    let (_, rho, eta) = linalg::ridge_solve(&q, &diff, &rhs, l);
                    (l, rho, eta)
                })
                .collect();
            (lcurve_corner(&pts), pts)
        }
    };
    let (s, residual_norm, solution_norm) = linalg::ridge_solve(&q, &diff, &rhs, chosen);
    Ok(SprimeCurve {
        x_grid: kernel.x_grid.clone(),
        sprime: s.iter().copied().collect(),
        lambda: chosen,
        residual_norm,
        solution_norm,
        lcurve,
    })
}

/// Corner of the L-curve by maximum distance from the chord joining its
/// endpoints in log-log coordinates.
fn lcurve_corner(points: &[(f64, f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(_, rho, eta)| (rho.max(1e-300).ln(), eta.max(1e-300).ln()))
        .collect();
    let (x0, y0) = logs[0];
    let (x1, y1) = *logs.last().unwrap();
    let dx = x1 - x0;
    let dy = y1 - y0;
    let norm = (dx * dx + dy * dy).sqrt().max(1e-300);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &(x, y)) in logs.iter().enumerate() {
        let dist = ((x - x0) * dy - (y - y0) * dx).abs() / norm;
        if dist > best.1 {
            best = (i, dist);
        }
    }
    points[best.0].0
}

// ---------------------------------------------------------------------------
// Constant-effect averaging
// ---------------------------------------------------------------------------

/// Average the curve over the observed instrument values: samples whose
/// nearest grid point is invalid are dropped, the rest use interpolated
/// `phi`. Errors when fewer than ten curve points are valid or more than
/// half the samples fall in dropped regions.
pub fn theta_constant(phi: &PhiCurve, z_samples: &[f64]) -> Result<ConstantEffect> {
    if phi.x_dim != 1 || phi.z_dim != 1 {
        return Err(Error::InvalidParam("constant-effect averaging needs a scalar curve".into()));
    }
    if phi.valid_count() < MIN_VALID_POINTS {
        return Err(Error::TooFewValidPoints {
            got: phi.valid_count(),
            needed: MIN_VALID_POINTS,
            context: "valid phi points".into(),
        });
    }
    if z_samples.is_empty() {
        return Err(Error::InvalidParam("no instrument samples supplied".into()));
    }
    let grid = phi.grid_scalar();
    let values = phi.phi_scalar();
    let ok: Vec<bool> = phi.valid.iter().map(|v| v.is_valid()).collect();

    let mut kept = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        let nearest = nearest_index(&grid, z);
        if !ok[nearest] {
            continue;
        }
        kept.push(interp_with_fallback(&grid, &values, &ok, z, nearest));
    }
    let dropped = z_samples.len() - kept.len();
    let dropped_fraction = dropped as f64 / z_samples.len() as f64;
    if dropped_fraction > 0.5 {
        return Err(Error::PoorCoverage { dropped: 100.0 * dropped_fraction });
    }
    let theta = kept.iter().sum::<f64>() / kept.len() as f64;
    Ok(ConstantEffect { theta, dropped_fraction, phi_at_samples: kept })
}

fn nearest_index(grid: &[f64], z: f64) -> usize {
    let hi = grid.partition_point(|&g| g < z);
    if hi == 0 {
        0
    } else if hi >= grid.len() {
        grid.len() - 1
    } else if (z - grid[hi - 1]) <= (grid[hi] - z) {
        hi - 1
    } else {
        hi
    }
}

fn interp_with_fallback(grid: &[f64], values: &[f64], ok: &[bool], z: f64, nearest: usize) -> f64 {
    let last = grid.len() - 1;
    if z <= grid[0] || z >= grid[last] {
        return values[nearest];
    }
    let hi = grid.partition_point(|&g| g < z);
    let lo = hi - 1;
    if ok[lo] && ok[hi] {
        let t = (z - grid[lo]) / (grid[hi] - grid[lo]);
        values[lo] + t * (values[hi] - values[lo])
    } else {
        values[nearest]
    }
}

/// End-to-end constant-effect pipeline with a refit bootstrap: rows are
/// resampled, the curve is refitted at the bandwidth chosen on the
/// original sample, and the average is recomputed.
pub fn estimate_constant_effect(
    d: &ContinuousDataset,
    opts: &ContinuousOptions,
    bootstrap: Option<usize>,
    seed: u64,
) -> Result<ConstantEffectEstimate> {
    let curve = estimate_phi_scalar(d, opts)?;
    let z = d.z_col(0);
    let point = theta_constant(&curve, &z)?;
    let mut warnings = curve.warnings.clone();
    if point.dropped_fraction > 0.0 {
        warnings.push(format!(
            "{:.1}% of samples fell outside the valid curve region",
            100.0 * point.dropped_fraction
        ));
    }
    let mut estimate = ConstantEffectEstimate {
        theta: point.theta,
        boot_se: None,
        boot_ci: None,
        dropped_fraction: point.dropped_fraction,
        warnings,
    };
    if let Some(reps) = bootstrap {
        let refit_opts = ContinuousOptions {
            bandwidth: Some(curve.bandwidths[0]),
            ..opts.clone()
        };
        let (ci, se, failures) = bootstrap_theta(reps, seed, 1, |rng| {
            let resampled = resample(d, rng);
            let curve = estimate_phi_scalar_at(&resampled, &refit_opts, curve.bandwidths[0])?;
            let z = resampled.z_col(0);
            theta_constant(&curve, &z).map(|c| vec![c.theta])
        });
        if failures * 5 > reps {
            estimate
                .warnings
                .push(format!("bootstrap: {failures} of {reps} replicates failed"));
        }
        estimate.boot_ci = ci.map(|c| c[0]);
        estimate.boot_se = se.map(|s| s[0]);
    }
    Ok(estimate)
}

fn resample(d: &ContinuousDataset, rng: &mut impl rand::Rng) -> ContinuousDataset {
    let n = d.len();
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * d.x_dim);
    let mut z = Vec::with_capacity(n * d.z_dim);
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        y.push(d.y[i]);
        x.extend_from_slice(&d.x[i * d.x_dim..(i + 1) * d.x_dim]);
        z.extend_from_slice(&d.z[i * d.z_dim..(i + 1) * d.z_dim]);
    }
    ContinuousDataset {
        y,
        x,
        z,
        x_dim: d.x_dim,
        z_dim: d.z_dim,
        x_bounds: d.x_bounds.clone(),
        z_bounds: d.z_bounds.clone(),
    }
}

// ---------------------------------------------------------------------------
// Linear ratio
// ---------------------------------------------------------------------------

/// Ordinary least-squares slope of `y` on `z` divided by the slope of
/// `x` on `z`. Requires scalar data and a non-degenerate instrument.
pub fn linear_iv_ratio(d: &ContinuousDataset) -> Result<LinearIvFit> {
    if d.x_dim != 1 || d.z_dim != 1 {
        return Err(Error::RegimeMismatch("linear ratio needs scalar x and z".into()));
    }
    if d.len() < 3 {
        return Err(Error::TooFewValidPoints { got: d.len(), needed: 3, context: "linear ratio".into() });
    }
    let z = d.z_col(0);
    let x = d.x_col(0);
    // canonical order keeps the sums permutation-invariant
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| {
        z[a].total_cmp(&z[b])
            .then_with(|| x[a].total_cmp(&x[b]))
            .then_with(|| d.y[a].total_cmp(&d.y[b]))
    });
    let n = d.len() as f64;
    let mean = |v: &dyn Fn(usize) -> f64| order.iter().map(|&i| v(i)).sum::<f64>() / n;
    let mz = mean(&|i| z[i]);
    let mx = mean(&|i| x[i]);
    let my = mean(&|i| d.y[i]);
    let mut var_z = 0.0;
    let mut var_y = 0.0;
    let mut cov_yz = 0.0;
    let mut cov_xz = 0.0;
    for &i in &order {
        let dz = z[i] - mz;
        var_z += dz * dz;
        var_y += (d.y[i] - my) * (d.y[i] - my);
        cov_yz += (d.y[i] - my) * dz;
        cov_xz += (x[i] - mx) * dz;
    }
    if var_z <= 0.0 {
        return Err(Error::WeakInstrument("instrument sample variance is zero".into()));
    }
    let slope_yz = cov_yz / var_z;
    let slope_xz = cov_xz / var_z;
    let scale = 1e-12 * (var_y / var_z).sqrt();
    if slope_xz.abs() < scale.max(f64::MIN_POSITIVE) {
        return Err(Error::WeakInstrument(format!(
            "slope of x on z is {slope_xz:.3e}, below the degeneracy threshold"
        )));
    }
    Ok(LinearIvFit { beta_hat: slope_yz / slope_xz, slope_yz, slope_xz })
}
