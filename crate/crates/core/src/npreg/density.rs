//! Conditional density estimation on a product grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::npreg::kernel::tricube;

/// Discretized family of conditional densities of `X` given `Z = z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondDensityKernel {
    pub x_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    /// Row-major `x_grid.len() x z_grid.len()`; column `j` is the density
    /// of `X` at the `x_grid` points given `Z = z_grid[j]`.
    pub k: Vec<Vec<f64>>,
    /// Trapezoid quadrature weight of each `x_grid` cell.
    pub x_weights: Vec<f64>,
    /// Columns with enough local data; masked columns are all NaN.
    pub valid_cols: Vec<bool>,
    pub bandwidth_x: f64,
    pub bandwidth_z: f64,
    pub warnings: Vec<String>,
}

impl CondDensityKernel {
    /// Integral of column `j` over the `x_grid` (1 for valid columns).
    pub fn column_mass(&self, j: usize) -> f64 {
        (0..self.x_grid.len()).map(|i| self.k[i][j] * self.x_weights[i]).sum()
    }
}

/// Trapezoid weights for an increasing grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let half = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

/// Product-kernel conditional density estimate of `X` given `Z`, with
/// each usable column renormalized to integrate to one over `x_grid`.
///
/// Columns whose marginal `z` weight is negligible (roughly fewer than
/// five effective observations) are masked.
pub fn fit_cond_density(
    x: &[f64],
    z: &[f64],
    x_grid: &[f64],
    z_grid: &[f64],
    bandwidth_x: f64,
    bandwidth_z: f64,
) -> Result<CondDensityKernel> {
    if x.len() != z.len() {
        return Err(Error::InvalidParam("x and z must have equal length".into()));
    }
    if x.len() < 100 {
        return Err(Error::TooFewValidPoints {
            got: x.len(),
            needed: 100,
            context: "conditional density estimation".into(),
        });
    }
    if bandwidth_x <= 0.0 || bandwidth_z <= 0.0 {
        return Err(Error::InvalidParam("bandwidths must be positive".into()));
    }
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("x_grid must be strictly increasing".into()));
    }
    if z_grid.is_empty() || z_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("z_grid must be strictly increasing".into()));
    }

    // canonical order over (z, x) for exact permutation invariance
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then_with(|| x[a].total_cmp(&x[b])));
    let zs: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();

    let x_weights = trapezoid_weights(x_grid);
    let nx = x_grid.len();

    let columns: Vec<Option<Vec<f64>>> = exec::map_indexed(z_grid.len(), |j| {
        let zj = z_grid[j];
        let lo = zs.partition_point(|&v| v <= zj - bandwidth_z);
        let hi = zs.partition_point(|&v| v < zj + bandwidth_z);
        let mut col = vec![0.0; nx];
        let mut weight_sum = 0.0;
        for s in lo..hi {
            let wz = tricube((zs[s] - zj) / bandwidth_z);
            if wz == 0.0 {
                continue;
            }
            weight_sum += wz;
            let xv = xs[s];
            // only x_grid points within the x bandwidth see this sample
            let a = x_grid.partition_point(|&g| g <= xv - bandwidth_x);
            let b = x_grid.partition_point(|&g| g < xv + bandwidth_x);
            for gi in a..b {
                col[gi] += wz * tricube((x_grid[gi] - xv) / bandwidth_x);
            }
        }
        // require about five effective points
        if weight_sum < 5.0 * tricube(0.5) {
            return None;
        }
        // renormalize to integrate to one over the x grid
        let mass: f64 = col.iter().zip(&x_weights).map(|(c, w)| c * w).sum();
        if mass <= 0.0 {
            return None;
        }
        for c in col.iter_mut() {
            *c /= mass;
        }
        Some(col)
    });

    let mut k = vec![vec![f64::NAN; z_grid.len()]; nx];
    let mut valid_cols = vec![false; z_grid.len()];
    let mut masked = 0;
    for (j, col) in columns.into_iter().enumerate() {
        match col {
            Some(col) => {
                valid_cols[j] = true;
                for i in 0..nx {
                    k[i][j] = col[i];
                }
            }
            None => masked += 1,
        }
    }
    let mut warnings = Vec::new();
    if masked > 0 {
        warnings.push(format!(
            "{masked} of {} z columns masked for negligible marginal density",
            z_grid.len()
        ));
    }
    Ok(CondDensityKernel {
        x_grid: x_grid.to_vec(),
        z_grid: z_grid.to_vec(),
        k,
        x_weights,
        valid_cols,
        bandwidth_x,
        bandwidth_z,
        warnings,
    })
}
