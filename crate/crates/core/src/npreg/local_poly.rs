//! Local polynomial fits on a grid, with derivatives from the linear
//! coefficient.
//!
//! Samples are re-ordered into a canonical sort before any accumulation,
//! so fits are exactly invariant under permutations of the input. The
//! predictor is centered and scaled by the bandwidth at each grid point,
//! which keeps the small normal-equation systems well conditioned.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::solve_spd_small;
use crate::npreg::kernel::tricube;

/// A fitted conditional-mean curve and its first derivative on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    pub grid: Vec<f64>,
    /// Fitted mean at each grid point (NaN where masked).
    pub values: Vec<f64>,
    /// Fitted first derivative at each grid point (NaN where masked).
    pub derivs: Vec<f64>,
    /// False where the local window held too little data.
    pub valid: Vec<bool>,
    pub bandwidth: f64,
    pub degree: usize,
    pub warnings: Vec<String>,
}

/// Samples in canonical (sorted) order, shared across responses.
pub(crate) struct Design {
    pub x: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(x: &[f64], responses: &[&[f64]]) -> Self {
        let n = x.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| {
            x[a].total_cmp(&x[b]).then_with(|| {
                for r in responses {
                    match r[a].total_cmp(&r[b]) {
                        Ordering::Equal => continue,
                        other => return other,
                    }
                }
                Ordering::Equal
            })
        });
        let sorted_x: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let ys = responses
            .iter()
            .map(|r| perm.iter().map(|&i| r[i]).collect())
            .collect();
        Self { x: sorted_x, ys }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Half-open index range of samples with positive kernel weight.
    fn window(&self, center: f64, h: f64) -> (usize, usize) {
        let lo = self.x.partition_point(|&v| v <= center - h);
        let hi = self.x.partition_point(|&v| v < center + h);
        (lo, hi)
    }
}

/// Multi-response fit sharing one window and design per grid point.
pub(crate) struct MultiFit {
    /// `values[r][g]`.
    pub values: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
    pub valid: Vec<bool>,
    pub masked: usize,
}

/// Weighted local polynomial fit of every response at every grid point.
/// `counts`, when given, multiplies each sample's weight (sorted order);
/// zeros drop the sample. Used for cross-validation folds and bootstrap
/// resamples without re-sorting.
pub(crate) fn fit_multi(
    design: &Design,
    degree: usize,
    bandwidth: f64,
    grid: &[f64],
    counts: Option<&[f64]>,
) -> MultiFit {
    let n_resp = design.ys.len();
    let n_coef = degree + 1;
    let points: Vec<Option<Vec<Vec<f64>>>> = exec::map_indexed(grid.len(), |gi| {
        let g = grid[gi];
        let (lo, hi) = design.window(g, bandwidth);
        if hi - lo < n_coef {
            return None;
        }
        let mut moments = vec![0.0; 2 * degree + 1];
        let mut rhs = vec![0.0; n_coef * n_resp];
        let inv_h = 1.0 / bandwidth;

        let mut distinct = 0usize;
        let mut last_x = f64::NAN;
        for i in lo..hi {
            let c = counts.map_or(1.0, |c| c[i]);
            if c == 0.0 {
                continue;
            }
            let xi = design.x[i];
            if xi != last_x {
                distinct += 1;
                last_x = xi;
            }
            let u = (xi - g) * inv_h;
            let w = tricube(u) * c;
            let mut up = w;
            for m in moments.iter_mut() {
                *m += up;
                up *= u;
            }
            for (r, y) in design.ys.iter().enumerate() {
                let yv = y[i];
                let mut up = w * yv;
                for p in 0..n_coef {
                    rhs[r * n_coef + p] += up;
                    up *= u;
                }
            }
        }
        if distinct < n_coef || moments[0] <= 0.0 {
            return None;
        }

        let mut mat = vec![0.0; n_coef * n_coef];
        for p in 0..n_coef {
            for q in 0..n_coef {
                mat[p * n_coef + q] = moments[p + q];
            }
        }
        let mut out = Vec::with_capacity(n_resp);
        for r in 0..n_resp {
            match solve_spd_small(&mat, &rhs[r * n_coef..(r + 1) * n_coef], n_coef) {
                Some(beta) => out.push(beta),
                None => return None,
            }
        }
        Some(out)
    });

    let mut values = vec![vec![f64::NAN; grid.len()]; n_resp];
    let mut derivs = vec![vec![f64::NAN; grid.len()]; n_resp];
    let mut valid = vec![false; grid.len()];
    let mut masked = 0;
    for (gi, point) in points.into_iter().enumerate() {
        match point {
            Some(betas) => {
                valid[gi] = true;
                for (r, beta) in betas.into_iter().enumerate() {
                    values[r][gi] = beta[0];
                    derivs[r][gi] = beta[1] / bandwidth;
                }
            }
            None => masked += 1,
        }
    }
    MultiFit { values, derivs, valid, masked }
}

fn validate_inputs(x: &[f64], y_len: usize, degree: usize, bandwidth: f64, grid: &[f64]) -> Result<()> {
    if x.len() != y_len {
        return Err(Error::InvalidParam("x and y must have equal length".into()));
    }
    if x.is_empty() {
        return Err(Error::InvalidParam("cannot fit an empty sample".into()));
    }
    if !(1..=3).contains(&degree) {
        return Err(Error::InvalidParam("degree must be 1, 2 or 3".into()));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidParam("bandwidth must be positive".into()));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("grid must be strictly increasing".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("non-finite predictor value".into()));
    }
    Ok(())
}

/// Local polynomial regression of `y` on `x` evaluated on `grid`.
///
/// The fitted value is the local intercept and the derivative the local
/// linear coefficient. Grid points whose window holds fewer than
/// `degree + 1` distinct predictor values are masked and reported in
/// `warnings`.
pub fn fit_local_poly(
    x: &[f64],
    y: &[f64],
    degree: usize,
    bandwidth: f64,
    grid: &[f64],
) -> Result<RegressionFit> {
    validate_inputs(x, y.len(), degree, bandwidth, grid)?;
    let design = Design::new(x, &[y]);
    let fit = fit_multi(&design, degree, bandwidth, grid, None);
    let mut warnings = Vec::new();
    if fit.masked > 0 {
        warnings.push(format!(
            "{} of {} grid points masked: fewer than {} distinct predictor values in window",
            fit.masked,
            grid.len(),
            degree + 1
        ));
    }
    let mut values = fit.values;
    let mut derivs = fit.derivs;
    Ok(RegressionFit {
        grid: grid.to_vec(),
        values: values.swap_remove(0),
        derivs: derivs.swap_remove(0),
        valid: fit.valid,
        bandwidth,
        degree,
        warnings,
    })
}

/// Linear interpolation of a (partially masked) grid curve at `x`,
/// clamped to the grid range. `None` when a needed grid value is masked.
pub fn interp_curve(grid: &[f64], values: &[f64], valid: &[bool], x: f64) -> Option<f64> {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return valid[0].then(|| values[0]);
    }
    if x >= grid[last] {
        return valid[last].then(|| values[last]);
    }
    let hi = grid.partition_point(|&g| g < x);
    let lo = hi - 1;
    if !valid[lo] || !valid[hi] {
        return None;
    }
    let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    Some(values[lo] + t * (values[hi] - values[lo]))
}

// ---------------------------------------------------------------------------
// Multivariate local-linear fit (product kernel)
// ---------------------------------------------------------------------------

/// Multi-response local-linear fit in `dim` predictor coordinates.
/// Returns all partial derivatives at each grid row; one shared design
/// per grid row. Grid rows are flattened `dim`-vectors.
pub(crate) struct NdFit {
    /// `values[r][g]`: the fitted mean, kept for tests and diagnostics.
    #[allow(dead_code)]
    pub values: Vec<Vec<f64>>,
    /// `grads[r][g]` has length `dim`.
    pub grads: Vec<Vec<Vec<f64>>>,
    pub valid: Vec<bool>,
}

pub(crate) fn fit_local_linear_nd(
    z: &[f64],
    dim: usize,
    responses: &[&[f64]],
    bandwidths: &[f64],
    grid_rows: &[Vec<f64>],
) -> NdFit {
    let n = z.len() / dim;
    let n_resp = responses.len();
    let n_coef = dim + 1;

    // canonical row order for exact permutation invariance
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| {
        for d in 0..dim {
            match z[a * dim + d].total_cmp(&z[b * dim + d]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        for r in responses {
            match r[a].total_cmp(&r[b]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    });

    let points: Vec<Option<Vec<Vec<f64>>>> = exec::map_indexed(grid_rows.len(), |gi| {
        let g = &grid_rows[gi];
        let mut mat = vec![0.0; n_coef * n_coef];
        let mut rhs = vec![0.0; n_coef * n_resp];
        let mut terms = vec![0.0; n_coef];
        let mut used = 0usize;
        for &row in &perm {
            let mut w = 1.0;
            for d in 0..dim {
                let u = (z[row * dim + d] - g[d]) / bandwidths[d];
                w *= tricube(u);
                if w == 0.0 {
                    break;
                }
                terms[d + 1] = u;
            }
            if w == 0.0 {
                continue;
            }
            used += 1;
            terms[0] = 1.0;
            for p in 0..n_coef {
                let wt = w * terms[p];
                for q in p..n_coef {
                    mat[p * n_coef + q] += wt * terms[q];
                }
                for (r, y) in responses.iter().enumerate() {
                    rhs[r * n_coef + p] += wt * y[row];
                }
            }
        }
        if used < n_coef {
            return None;
        }
        for p in 0..n_coef {
            for q in 0..p {
                mat[p * n_coef + q] = mat[q * n_coef + p];
            }
        }
        let mut out = Vec::with_capacity(n_resp);
        for r in 0..n_resp {
            match solve_spd_small(&mat, &rhs[r * n_coef..(r + 1) * n_coef], n_coef) {
                Some(beta) => out.push(beta),
                None => return None,
            }
        }
        Some(out)
    });

    let g_count = grid_rows.len();
    let mut values = vec![vec![f64::NAN; g_count]; n_resp];
    let mut grads = vec![vec![vec![f64::NAN; dim]; g_count]; n_resp];
    let mut valid = vec![false; g_count];
    for (gi, point) in points.into_iter().enumerate() {
        if let Some(betas) = point {
            valid[gi] = true;
            for (r, beta) in betas.into_iter().enumerate() {
                values[r][gi] = beta[0];
                for d in 0..dim {
                    grads[r][gi][d] = beta[d + 1] / bandwidths[d];
                }
            }
        }
    }
    NdFit { values, grads, valid }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::npreg::default_grid;
    use approx::assert_relative_eq;

    fn equispaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn local_linear_reproduces_affine_exactly() {
        let x = equispaced(400, 0.0, 1.0);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let grid = default_grid(0.0, 1.0, 51, 0.025);
        let fit = fit_local_poly(&x, &y, 1, 0.15, &grid).unwrap();
        for (gi, &g) in grid.iter().enumerate() {
            assert!(fit.valid[gi]);
            assert_relative_eq!(fit.values[gi], 2.0 * g + 1.0, epsilon = 1e-8);
            assert_relative_eq!(fit.derivs[gi], 2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn local_quadratic_reproduces_quadratics_exactly() {
        let x = equispaced(400, -1.0, 1.0);
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let grid = default_grid(-1.0, 1.0, 41, 0.025);
        let fit = fit_local_poly(&x, &y, 2, 0.3, &grid).unwrap();
        for (gi, &g) in grid.iter().enumerate() {
            assert_relative_eq!(fit.values[gi], g * g, epsilon = 1e-8);
            assert_relative_eq!(fit.derivs[gi], 2.0 * g, epsilon = 1e-8);
        }
    }

    #[test]
    fn fits_are_invariant_to_sample_order() {
        let x = equispaced(200, 0.0, 1.0);
        let y: Vec<f64> = x.iter().map(|v| (4.0 * v).sin()).collect();
        let grid = default_grid(0.0, 1.0, 21, 0.025);
        let fit = fit_local_poly(&x, &y, 2, 0.2, &grid).unwrap();

        let mut xr = x.clone();
        let mut yr = y.clone();
        xr.reverse();
        yr.reverse();
        let fit_rev = fit_local_poly(&xr, &yr, 2, 0.2, &grid).unwrap();
        assert_eq!(fit.values, fit_rev.values);
        assert_eq!(fit.derivs, fit_rev.derivs);
    }

    #[test]
    fn sparse_window_is_masked_with_warning() {
        // all the data sits near 0; grid points near 1 see nothing
        let x = vec![0.0, 0.01, 0.02, 0.03, 0.05];
        let y = vec![1.0, 1.1, 0.9, 1.0, 1.05];
        let grid = vec![0.02, 0.5, 0.98];
        let fit = fit_local_poly(&x, &y, 1, 0.08, &grid).unwrap();
        assert!(fit.valid[0]);
        assert!(!fit.valid[1]);
        assert!(!fit.valid[2]);
        assert!(fit.values[1].is_nan());
        assert_eq!(fit.warnings.len(), 1);
    }

    #[test]
    fn degenerate_bandwidth_is_rejected() {
        let err = fit_local_poly(&[0.0, 1.0], &[0.0, 1.0], 1, 0.0, &[0.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("bandwidth"));
    }

    #[test]
    fn interp_clamps_and_respects_masks() {
        let grid = vec![0.0, 1.0, 2.0];
        let values = vec![0.0, 10.0, 20.0];
        let valid = vec![true, true, false];
        assert_eq!(interp_curve(&grid, &values, &valid, -1.0), Some(0.0));
        assert_eq!(interp_curve(&grid, &values, &valid, 0.5), Some(5.0));
        assert_eq!(interp_curve(&grid, &values, &valid, 1.5), None);
        assert_eq!(interp_curve(&grid, &values, &valid, 3.0), None);
    }

    #[test]
    fn nd_fit_recovers_plane() {
        // y = 1 + 2 z1 - 3 z2 on a lattice
        let mut z = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                let a = i as f64 / 39.0;
                let b = j as f64 / 39.0;
                z.push(a);
                z.push(b);
                y.push(1.0 + 2.0 * a - 3.0 * b);
            }
        }
        let grid_rows = vec![vec![0.5, 0.5], vec![0.3, 0.7]];
        let fit = fit_local_linear_nd(&z, 2, &[&y], &[0.3, 0.3], &grid_rows);
        for gi in 0..2 {
            assert!(fit.valid[gi]);
            let g = &grid_rows[gi];
            assert_relative_eq!(fit.values[0][gi], 1.0 + 2.0 * g[0] - 3.0 * g[1], epsilon = 1e-8);
            assert_relative_eq!(fit.grads[0][gi][0], 2.0, epsilon = 1e-8);
            assert_relative_eq!(fit.grads[0][gi][1], -3.0, epsilon = 1e-8);
        }
    }
}
