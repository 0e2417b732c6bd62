//! Naive regression baselines, kept alongside the instrument-based
//! estimators so studies can show what ignoring confounding costs.

use crate::error::{Error, Result};

/// Difference of group means of `y` between each non-baseline `x` level
/// and level 0. Returns one entry per level `1..=n`; levels without
/// observations give NaN.
pub fn group_mean_diff(y: &[f64], x_codes: &[usize], n: usize) -> Result<Vec<f64>> {
    if y.len() != x_codes.len() {
        return Err(Error::InvalidParam("y and x must have equal length".into()));
    }
    let mut sums = vec![0.0; n + 1];
    let mut counts = vec![0usize; n + 1];
    // canonical per-group accumulation
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| x_codes[a].cmp(&x_codes[b]).then(y[a].total_cmp(&y[b])));
    for &i in &order {
        let c = x_codes[i];
        if c > n {
            return Err(Error::InvalidParam(format!("x code {c} exceeds {n}")));
        }
        sums[c] += y[i];
        counts[c] += 1;
    }
    let mean = |j: usize| {
        if counts[j] == 0 {
            f64::NAN
        } else {
            sums[j] / counts[j] as f64
        }
    };
    let base = mean(0);
    Ok((1..=n).map(|j| mean(j) - base).collect())
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(y: &[f64], x: &[f64]) -> Result<f64> {
    if y.len() != x.len() || y.len() < 2 {
        return Err(Error::InvalidParam("need two aligned samples".into()));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let n = y.len() as f64;
    let mx = order.iter().map(|&i| x[i]).sum::<f64>() / n;
    let my = order.iter().map(|&i| y[i]).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &i in &order {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx <= 0.0 {
        return Err(Error::InvalidParam("x has zero variance".into()));
    }
    Ok(sxy / sxx)
}
