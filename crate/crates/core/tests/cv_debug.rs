use ivkit::continuous_iv::{estimate_phi_scalar, recover_sprime, ContinuousOptions};
use ivkit::linalg;
use ivkit::npreg::{data_range, default_grid, fit_cond_density};
use ivkit::npreg::density::trapezoid_weights;
use ivkit::scm::scenarios::{additive_scm, SmoothFn};
use ivkit::scm::{simulate_continuous, ScalarLaw};
use nalgebra::{DMatrix, DVector};

#[test]
fn probe() {
    let (model, _) = additive_scm(
        SmoothFn::quadratic(1.0, 0.0, 0.0),
        SmoothFn::identity(),
        ScalarLaw::Normal { mean: 0.0, sd: 0.5 },
        ScalarLaw::Normal { mean: 0.0, sd: 0.5 },
    ).unwrap();
    let d = simulate_continuous(&model, 100_000, 52_001).unwrap();
    let curve = estimate_phi_scalar(&d, &ContinuousOptions::default()).unwrap();
    let z_grid: Vec<f64> = curve.grid.iter().zip(&curve.valid).filter(|(_, v)| v.is_valid()).map(|(g, _)| g[0]).collect();
    let x = d.x_col(0);
    let z = d.z_col(0);
    let (xlo, xhi) = data_range(&x);
    let x_grid = default_grid(xlo, xhi, 101, 0.025);
    println!("x range [{xlo:.3}, {xhi:.3}], z grid [{:.3}, {:.3}] ({} pts)", z_grid[0], z_grid[z_grid.len()-1], z_grid.len());

    let span = x_grid[100] - x_grid[0];
    let (lo60, hi60) = (x_grid[0] + 0.2 * span, x_grid[0] + 0.8 * span);
    let sup60 = |s: &[f64]| {
        let mut w: f64 = 0.0;
        for (i, &xg) in x_grid.iter().enumerate() {
            if (lo60..=hi60).contains(&xg) { w = w.max((s[i] - 2.0 * xg).abs()); }
        }
        w
    };

    // exact-kernel oracle across lambda
    let normal = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let weights = trapezoid_weights(&x_grid);
    let q = DMatrix::from_fn(z_grid.len(), x_grid.len(), |r, i| {
        weights[i] * normal((x_grid[i] - z_grid[r]) / 0.5) / 0.5
    });
    let phi_exact = DVector::from_fn(z_grid.len(), |r, _| 2.0 * z_grid[r]);
    let mut diff = DMatrix::zeros(x_grid.len() - 1, x_grid.len());
    for i in 0..x_grid.len() - 1 { diff[(i, i)] = -1.0; diff[(i, i + 1)] = 1.0; }
    println!("-- exact kernel, exact phi");
    for k in 0..12 {
        let lam = 1e-9 * (10f64).powi(k);
        let (s, rho, eta) = linalg::ridge_solve(&q, &diff, &phi_exact, lam);
        let sv: Vec<f64> = s.iter().copied().collect();
        println!("lam {lam:.1e} sup60 {:.4} rho {rho:.4e} eta {eta:.4e}", sup60(&sv));
    }

    // estimated kernel + estimated phi
    let n_pow = (100_000f64).powf(-0.2);
    let sd = |v: &[f64]| { let m = v.iter().sum::<f64>() / v.len() as f64; (v.iter().map(|t| (t-m)*(t-m)).sum::<f64>() / v.len() as f64).sqrt() };
    let kernel = fit_cond_density(&x, &z, &x_grid, &z_grid, 2.0 * sd(&x) * n_pow, 2.0 * sd(&z) * n_pow).unwrap();
    println!("-- estimated kernel, estimated phi (bw_x {:.3} bw_z {:.3})", 2.0*sd(&x)*n_pow, 2.0*sd(&z)*n_pow);
    for k in 0..12 {
        let lam = 1e-9 * (10f64).powi(k);
        let fit = recover_sprime(&curve, &kernel, Some(lam)).unwrap();
        println!("lam {lam:.1e} sup60 {:.4} rho {:.4e} eta {:.4e}", sup60(&fit.sprime), fit.residual_norm, fit.solution_norm);
    }
    let auto = recover_sprime(&curve, &kernel, None).unwrap();
    println!("lcurve pick {:.3e} sup60 {:.4}", auto.lambda, sup60(&auto.sprime));
    for (l, r, e) in &auto.lcurve { println!("  sweep l {l:.3e} rho {r:.4e} eta {e:.4e}"); }
}
