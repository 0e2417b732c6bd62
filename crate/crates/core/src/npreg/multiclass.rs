//! Class-probability curves `q_j(z)` with derivatives.
//!
//! Each class indicator is regressed on `z` with a shared bandwidth;
//! the raw fits are clipped to `[0, 1]` and renormalized onto the
//! probability simplex, with derivatives pushed through the same
//! transformation. Rows therefore sum to one exactly and derivative
//! rows sum to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::npreg::local_poly::{fit_multi, Design};

/// Fitted class-probability curves on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbFit {
    pub grid: Vec<f64>,
    /// Row-major grid x (n+1); each row is a probability simplex.
    pub probs: Vec<Vec<f64>>,
    /// Matching derivatives; rows sum to zero.
    pub dprobs: Vec<Vec<f64>>,
    pub valid: Vec<bool>,
    pub bandwidth: f64,
    pub degree: usize,
    pub warnings: Vec<String>,
}

impl ProbFit {
    /// Number of classes (n + 1).
    pub fn classes(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }
}

/// Fit all class-probability curves for codes `0..n_classes`.
///
/// A class with no observations at all keeps a zero curve and zero
/// derivative and is reported in `warnings`.
pub fn fit_multiclass_probs(
    z: &[f64],
    x_codes: &[usize],
    n_classes: usize,
    degree: usize,
    bandwidth: f64,
    grid: &[f64],
) -> Result<ProbFit> {
    if z.len() != x_codes.len() {
        return Err(Error::InvalidParam("z and x must have equal length".into()));
    }
    if n_classes < 2 {
        return Err(Error::InvalidParam("need at least two classes".into()));
    }
    if let Some(&bad) = x_codes.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidParam(format!("x code {bad} exceeds class count {n_classes}")));
    }

    let mut warnings = Vec::new();
    let mut class_counts = vec![0usize; n_classes];
    for &c in x_codes {
        class_counts[c] += 1;
    }
    for (j, &c) in class_counts.iter().enumerate() {
        if c == 0 {
            warnings.push(format!("class {j} has no observations; its curve is zero"));
        }
    }

    let indicators: Vec<Vec<f64>> = (0..n_classes)
        .map(|j| x_codes.iter().map(|&c| (c == j) as i32 as f64).collect())
        .collect();
    let refs: Vec<&[f64]> = indicators.iter().map(Vec::as_slice).collect();
    let design = Design::new(z, &refs);
    let fit = fit_multi(&design, degree, bandwidth, grid, None);
    if fit.masked > 0 {
        warnings.push(format!("{} of {} grid points masked for sparse windows", fit.masked, grid.len()));
    }

    let mut probs = vec![vec![0.0; n_classes]; grid.len()];
    let mut dprobs = vec![vec![0.0; n_classes]; grid.len()];
    let mut valid = fit.valid.clone();
    for gi in 0..grid.len() {
        if !valid[gi] {
            for j in 0..n_classes {
                probs[gi][j] = f64::NAN;
                dprobs[gi][j] = f64::NAN;
            }
            continue;
        }
        // clip raw fits to [0, 1]; a clipped coordinate is locally flat
        let mut clipped = vec![0.0; n_classes];
        let mut dclipped = vec![0.0; n_classes];
        for j in 0..n_classes {
            let raw = fit.values[j][gi];
            if raw <= 0.0 {
                clipped[j] = 0.0;
            } else if raw >= 1.0 {
                clipped[j] = 1.0;
            } else {
                clipped[j] = raw;
                dclipped[j] = fit.derivs[j][gi];
            }
        }
        let total: f64 = clipped.iter().sum();
        if total <= 1e-12 {
            valid[gi] = false;
            for j in 0..n_classes {
                probs[gi][j] = f64::NAN;
                dprobs[gi][j] = f64::NAN;
            }
            continue;
        }
        let dtotal: f64 = dclipped.iter().sum();
        for j in 0..n_classes {
            probs[gi][j] = clipped[j] / total;
            // quotient rule through the renormalization
            dprobs[gi][j] = (dclipped[j] * total - clipped[j] * dtotal) / (total * total);
        }
    }

    Ok(ProbFit {
        grid: grid.to_vec(),
        probs,
        dprobs,
        valid,
        bandwidth,
        degree,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::npreg::default_grid;
    use approx::assert_relative_eq;

    #[test]
    fn constant_class_gives_degenerate_simplex() {
        let z: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        let x = vec![1usize; 200];
        let grid = default_grid(0.0, 1.0, 21, 0.025);
        let fit = fit_multiclass_probs(&z, &x, 2, 2, 0.3, &grid).unwrap();
        for gi in 0..grid.len() {
            assert!(fit.valid[gi]);
            assert_relative_eq!(fit.probs[gi][1], 1.0, epsilon = 1e-9);
            assert_relative_eq!(fit.probs[gi][0], 0.0, epsilon = 1e-9);
            assert_relative_eq!(fit.dprobs[gi][0], 0.0, epsilon = 1e-9);
            assert_relative_eq!(fit.dprobs[gi][1], 0.0, epsilon = 1e-9);
        }
        assert!(fit.warnings.iter().any(|w| w.contains("class 0")));
    }

    #[test]
    fn rows_are_simplices_and_derivative_rows_sum_to_zero() {
        let z: Vec<f64> = (0..500).map(|i| i as f64 / 499.0).collect();
        let x: Vec<usize> = z.iter().map(|&v| if v > 0.5 { 1 } else if v > 0.2 { 2 } else { 0 }).collect();
        let grid = default_grid(0.0, 1.0, 31, 0.025);
        let fit = fit_multiclass_probs(&z, &x, 3, 2, 0.2, &grid).unwrap();
        for gi in 0..grid.len() {
            if !fit.valid[gi] {
                continue;
            }
            let row_sum: f64 = fit.probs[gi].iter().sum();
            let drow_sum: f64 = fit.dprobs[gi].iter().sum();
            assert_relative_eq!(row_sum, 1.0, epsilon = 1e-9);
            assert_relative_eq!(drow_sum, 0.0, epsilon = 1e-9);
            assert!(fit.probs[gi].iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn label_swap_swaps_the_columns() {
        let z: Vec<f64> = (0..400).map(|i| i as f64 / 399.0).collect();
        let x: Vec<usize> = z.iter().enumerate().map(|(i, _)| (i % 2 == 0) as usize).collect();
        let grid = default_grid(0.0, 1.0, 15, 0.025);
        let fit = fit_multiclass_probs(&z, &x, 2, 2, 0.3, &grid).unwrap();
        let swapped: Vec<usize> = x.iter().map(|&c| 1 - c).collect();
        let fit_swapped = fit_multiclass_probs(&z, &swapped, 2, 2, 0.3, &grid).unwrap();
        for gi in 0..grid.len() {
            assert_eq!(fit.probs[gi][0], fit_swapped.probs[gi][1]);
            assert_eq!(fit.probs[gi][1], fit_swapped.probs[gi][0]);
        }
    }
}
