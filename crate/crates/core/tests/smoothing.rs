//! Monte Carlo checks of the smoothing layer against known curves.

use ivkit::npreg::{
    data_range, default_candidates, default_grid, fit_cond_density, fit_local_poly,
    fit_multiclass_probs, select_bandwidth_cv,
};
use ivkit::rng;
use ivkit::scm::scenarios::threshold_scm;
use ivkit::scm::{simulate_mixed, ScalarLaw};
use rand::Rng;
use rand_distr::StandardNormal;

fn inner_80(len: usize) -> std::ops::Range<usize> {
    (len / 10)..(len - len / 10)
}

#[test]
fn sine_derivative_rmse_with_cv_bandwidth() {
    // a curvature-heavy derivative target: cubic local fits keep the
    // derivative bias negligible across the whole smooth end of the
    // bandwidth grid, so the value-driven CV choice is safe
    let mut rng = rng::root(41);
    let n = 50_000;
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&v| {
            let noise: f64 = rng.sample(StandardNormal);
            (4.0 * v).sin() + 0.1_f64.sqrt() * noise
        })
        .collect();
    let candidates = default_candidates(1.0);
    let h = select_bandwidth_cv(&x, &y, 3, &candidates, 5, 0).unwrap();
    let (lo, hi) = data_range(&x);
    let grid = default_grid(lo, hi, 101, 0.025);
    let fit = fit_local_poly(&x, &y, 3, h, &grid).unwrap();

    let mut sq = 0.0;
    let mut count = 0usize;
    for gi in inner_80(grid.len()) {
        assert!(fit.valid[gi]);
        let truth = 4.0 * (4.0 * grid[gi]).cos();
        sq += (fit.derivs[gi] - truth).powi(2);
        count += 1;
    }
    let rmse = (sq / count as f64).sqrt();
    assert!(rmse < 0.15, "derivative rmse {rmse} with bandwidth {h}");
}

#[test]
fn derivative_agrees_with_differenced_values_on_smooth_targets() {
    let mut rng = rng::root(43);
    let n = 50_000;
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&v| {
            let noise: f64 = rng.sample(StandardNormal);
            (4.0 * v).sin() + 0.1_f64.sqrt() * noise
        })
        .collect();
    let candidates = default_candidates(1.0);
    let h = select_bandwidth_cv(&x, &y, 3, &candidates, 5, 0).unwrap();
    let grid = default_grid(0.0, 1.0, 101, 0.025);
    let fit = fit_local_poly(&x, &y, 3, h, &grid).unwrap();
    let spacing = grid[1] - grid[0];
    let tol = (5.0 * spacing).max(0.05);
    for gi in inner_80(grid.len()) {
        if gi == 0
            || gi + 1 == grid.len()
            || !(fit.valid[gi - 1] && fit.valid[gi] && fit.valid[gi + 1])
        {
            continue;
        }
        let central = (fit.values[gi + 1] - fit.values[gi - 1]) / (2.0 * spacing);
        assert!(
            (central - fit.derivs[gi]).abs() <= tol,
            "grid point {gi}: centered difference {central} vs derivative {} (bandwidth {h})",
            fit.derivs[gi]
        );
    }
}

#[test]
fn participation_curve_and_slope_are_recovered() {
    let (model, truth) = threshold_scm(
        1.0,
        2.0,
        0.0,
        1.0,
        ScalarLaw::Uniform { lo: -1.0, hi: 1.0 },
        0.5,
    )
    .unwrap();
    let d = simulate_mixed(&model, 100_000, 47).unwrap();
    let candidates = default_candidates(1.0);
    let h = select_bandwidth_cv(
        &d.z,
        &d.x.iter().map(|&c| c as f64).collect::<Vec<_>>(),
        2,
        &candidates,
        5,
        0,
    )
    .unwrap();
    let (lo, hi) = data_range(&d.z);
    let grid = default_grid(lo, hi, 101, 0.025);
    let fit = fit_multiclass_probs(&d.z, &d.x, 2, 2, h, &grid).unwrap();

    let q1 = truth.q1.as_ref().unwrap();
    let a1 = truth.a1.as_ref().unwrap();
    let mut max_q_err: f64 = 0.0;
    let mut max_a_err: f64 = 0.0;
    for gi in inner_80(grid.len()) {
        assert!(fit.valid[gi]);
        max_q_err = max_q_err.max((fit.probs[gi][1] - q1(grid[gi])).abs());
        max_a_err = max_a_err.max((fit.dprobs[gi][1] - a1(grid[gi])).abs());
    }
    assert!(max_q_err <= 0.02, "sup-norm error of q: {max_q_err}");
    assert!(max_a_err <= 0.1, "sup-norm error of q': {max_a_err}");
}

#[test]
fn conditional_density_recovers_a_gaussian_noise_channel() {
    let mut rng = rng::root(53);
    let n = 100_000;
    let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x: Vec<f64> = z
        .iter()
        .map(|&v| {
            let noise: f64 = rng.sample(StandardNormal);
            v + 0.5 * noise
        })
        .collect();
    let (xlo, xhi) = data_range(&x);
    let x_grid = default_grid(xlo, xhi, 121, 0.01);
    let z_grid = default_grid(-1.0, 1.0, 41, 0.025);
    let fit = fit_cond_density(&x, &z, &x_grid, &z_grid, 0.15, 0.1).unwrap();

    // column closest to z = 0
    let j = (0..z_grid.len())
        .min_by(|&a, &b| z_grid[a].abs().partial_cmp(&z_grid[b].abs()).unwrap())
        .unwrap();
    assert!(fit.valid_cols[j]);
    let mut mean = 0.0;
    for i in 0..x_grid.len() {
        mean += x_grid[i] * fit.k[i][j] * fit.x_weights[i];
    }
    let mut var = 0.0;
    for i in 0..x_grid.len() {
        var += (x_grid[i] - mean).powi(2) * fit.k[i][j] * fit.x_weights[i];
    }
    let sd = var.sqrt();
    assert!(mean.abs() <= 0.05, "conditional mean at z=0: {mean}");
    assert!((sd - 0.5).abs() <= 0.05, "conditional sd at z=0: {sd}");

    for j in 0..z_grid.len() {
        if fit.valid_cols[j] {
            let mass = fit.column_mass(j);
            assert!((mass - 1.0).abs() <= 2e-2, "column {j} mass {mass}");
        }
    }
}
