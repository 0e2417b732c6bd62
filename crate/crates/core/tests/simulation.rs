//! Monte Carlo checks of the simulators against exact population
//! quantities from the models themselves.

use ivkit::baseline::ols_slope;
use ivkit::dataset::group_stats;
use ivkit::discrete_iv::PairSet;
use ivkit::exec;
use ivkit::scm::scenarios::{
    linear_scm, noncompliance_scm, random_independent_scm, threshold_scm, NoncomplianceSpec,
};
use ivkit::scm::{
    exact_population_oracle, simulate_continuous, simulate_discrete, simulate_mixed, ScalarLaw,
};

#[test]
fn discrete_frequencies_match_population_conditionals() {
    let spec = NoncomplianceSpec {
        assign_prob: 0.4,
        complier_prob: 0.6,
        effect_levels: (0.5, 2.5),
        baseline: 1.0,
        effect_compliance_corr: 0.3,
    };
    let (model, _) = noncompliance_scm(&spec).unwrap();
    let d = simulate_discrete(&model, 100_000, 11).unwrap();
    let stats = group_stats(&d).unwrap();
    for level in 0..model.m() {
        let count = stats.group_counts[level] as f64;
        for code in 0..=model.n() {
            let p = model.prob_x_given_z(code, level);
            let tol = 3.0 * (p * (1.0 - p) / count).sqrt();
            let err = (stats.cond_prob_x[level][code] - p).abs();
            assert!(
                err <= tol.max(1e-4),
                "level {level} code {code}: |{err}| > {tol}"
            );
        }
    }
}

#[test]
fn empirical_contrasts_converge_to_population_contrasts() {
    let mut rng = ivkit::rng::root(21);
    let model = random_independent_scm(2, 3, &mut rng);
    let pairs = PairSet::all_pairs(3);
    let report = exact_population_oracle(&model, &pairs).unwrap();
    let d = simulate_discrete(&model, 100_000, 13).unwrap();
    let stats = group_stats(&d).unwrap();

    let min_group = *stats.group_counts.iter().min().unwrap() as f64;
    let envelope = 5.0 * (1.0 / min_group).sqrt();
    for (row, &(i, k)) in report.pairs.iter().enumerate() {
        for j in 1..=model.n() {
            let emp = stats.cond_prob_x[i][j] - stats.cond_prob_x[k][j];
            let err = (emp - report.a_pop[row][j - 1]).abs();
            assert!(err <= envelope, "pair ({i},{k}) class {j}: {err} > {envelope}");
        }
    }
}

#[test]
fn mixed_participation_rate_matches_the_choice_curve() {
    let (model, truth) = threshold_scm(
        1.0,
        2.0,
        0.0,
        1.0,
        ScalarLaw::Uniform { lo: -1.0, hi: 1.0 },
        0.5,
    )
    .unwrap();
    let d = simulate_mixed(&model, 100_000, 17).unwrap();
    let in_window: Vec<usize> = (0..d.len())
        .filter(|&i| (0.45..=0.55).contains(&d.z[i]))
        .collect();
    let count = in_window.len() as f64;
    let rate = in_window.iter().filter(|&&i| d.x[i] == 1).count() as f64 / count;
    let q = (truth.q1.as_ref().unwrap())(0.5);
    let se = (q * (1.0 - q) / count).sqrt();
    assert!(
        (rate - q).abs() <= 3.0 * se,
        "participation near z = 0.5: {rate} vs {q} (se {se})"
    );
}

#[test]
fn linear_model_slopes_match_closed_forms() {
    let (model, _) = linear_scm(2.0, 1.0, [0.5, 0.5, 0.5], 0.0).unwrap();
    let d = simulate_continuous(&model, 100_000, 19).unwrap();
    let z = d.z_col(0);
    let x = d.x_col(0);
    let slope_yz = ols_slope(&d.y, &z).unwrap();
    let slope_xz = ols_slope(&x, &z).unwrap();
    // y on z converges to beta * alpha, x on z to alpha
    let se_y = 1.2 / (0.577 * (d.len() as f64).sqrt());
    let se_x = 0.75 / (0.577 * (d.len() as f64).sqrt());
    assert!((slope_yz - 2.0).abs() <= 3.0 * se_y, "slope_yz = {slope_yz}");
    assert!((slope_xz - 1.0).abs() <= 3.0 * se_x, "slope_xz = {slope_xz}");
}

#[test]
fn continuous_simulation_is_deterministic() {
    let (model, _) = linear_scm(2.0, 1.0, [0.5, 0.5, 0.5], 0.3).unwrap();
    let a = simulate_continuous(&model, 2_000, 23).unwrap();
    let b = simulate_continuous(&model, 2_000, 23).unwrap();
    assert_eq!(a.y, b.y);
    assert_eq!(a.x, b.x);
    assert_eq!(a.z, b.z);
}

#[test]
fn constant_outcome_map_gives_flat_effect() {
    // y = u regardless of x: the outcome gradient is identically zero
    use ivkit::scm::{AnalyticDerivs, ContinuousScm, LatentLaw};
    use std::sync::Arc;
    let model = ContinuousScm {
        x_dim: 1,
        z_dim: 1,
        f_map: Arc::new(|_, u| u[0]),
        g_map: Arc::new(|z, u| vec![z[0] + 0.1 * u[0]]),
        u_law: LatentLaw::independent(vec![ScalarLaw::Normal { mean: 0.5, sd: 1.0 }]),
        z_law: vec![ScalarLaw::Uniform { lo: 0.0, hi: 1.0 }],
        x_bounds: vec![(-2.0, 3.0)],
        z_bounds: vec![(0.0, 1.0)],
        analytic: Some(AnalyticDerivs {
            dy_dx: Arc::new(|_, _| vec![0.0]),
            dx_dz: Arc::new(|_, _| vec![1.0]),
        }),
    };
    let phi = model.phi_at(&[0.5], 4_000, 3).unwrap();
    assert_eq!(phi[0], 0.0);
}

#[test]
fn oracle_identity_survives_parallel_and_sequential_paths() {
    // the report is a pure function; scheduling cannot change it
    let mut rng = ivkit::rng::root(31);
    let models: Vec<_> = (0..6).map(|_| random_independent_scm(1, 4, &mut rng)).collect();
    let pairs = PairSet::all_pairs(4);
    let par = exec::map_indexed(models.len(), |i| {
        exact_population_oracle(&models[i], &pairs).unwrap().b_pop
    });
    let seq = exec::map_indexed_seq(models.len(), |i| {
        exact_population_oracle(&models[i], &pairs).unwrap().b_pop
    });
    assert_eq!(par, seq);
}
