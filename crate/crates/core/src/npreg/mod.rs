//! Local polynomial regression with derivative estimates, bandwidth
//! selection by cross-validation, multiclass probability curves and a
//! conditional density estimator.
//!
//! One kernel shape is used project-wide: the tricube weight
//! `(1 - |u|^3)^3` on `[-1, 1]`. It is compactly supported (window
//! lookups stay cheap on sorted data) and has two continuous derivatives
//! at the window edge. Fits read the derivative off the local linear
//! coefficient instead of differencing fitted values; degree 2 is the
//! default whenever the derivative feeds a downstream estimator.
//!
//! Fitted values at a grid point are masked, not fabricated, when the
//! window holds fewer distinct predictor values than the polynomial
//! needs.

pub mod bandwidth;
pub mod density;
pub mod kernel;
pub mod local_poly;
pub mod multiclass;

pub use bandwidth::{default_candidates, select_bandwidth_cv, CvOptions};
pub use density::{fit_cond_density, CondDensityKernel};
pub use local_poly::{fit_local_poly, RegressionFit};
pub use multiclass::{fit_multiclass_probs, ProbFit};

/// Equispaced grid over the data range trimmed by `trim` of the range on
/// each side. Derivative estimates at the extreme edges are not
/// trustworthy; the trim keeps them out of every downstream fit.
pub fn default_grid(lo: f64, hi: f64, points: usize, trim: f64) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let span = hi - lo;
    let a = lo + trim * span;
    let b = hi - trim * span;
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Observed min and max of a slice.
pub fn data_range(xs: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in xs {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_trimmed_and_increasing() {
        let g = default_grid(0.0, 1.0, 101, 0.025);
        assert_eq!(g.len(), 101);
        assert!((g[0] - 0.025).abs() < 1e-12);
        assert!((g[100] - 0.975).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
