//! Property tests for the structural invariants.

use ivkit::dataset::{group_stats, DiscreteDataset};
use ivkit::npreg::{default_grid, fit_local_poly, fit_multiclass_probs};
use proptest::prelude::*;

fn dataset_strategy() -> impl Strategy<Value = DiscreteDataset> {
    // n = 2 non-baseline levels, m = 3 instrument levels
    let row = (any::<i16>(), 0usize..=2, 0usize..=2);
    proptest::collection::vec(row, 1..200).prop_map(|rows| {
        let y: Vec<f64> = rows.iter().map(|r| r.0 as f64 / 128.0).collect();
        let x: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let z: Vec<usize> = rows.iter().map(|r| r.2).collect();
        DiscreteDataset::new(y, x, z, 2, 3).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_stats_is_permutation_invariant(d in dataset_strategy(), seed in any::<u64>()) {
        let base = group_stats(&d).unwrap();

        // deterministic shuffle of the rows
        let mut order: Vec<usize> = (0..d.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut ivkit::rng::root(seed));
        let shuffled = DiscreteDataset::new(
            order.iter().map(|&i| d.y[i]).collect(),
            order.iter().map(|&i| d.x[i]).collect(),
            order.iter().map(|&i| d.z[i]).collect(),
            d.n,
            d.m,
        ).unwrap();
        let perm = group_stats(&shuffled).unwrap();

        prop_assert_eq!(base.group_counts, perm.group_counts);
        for level in 0..d.m {
            if base.cond_mean_y[level].is_nan() {
                prop_assert!(perm.cond_mean_y[level].is_nan());
            } else {
                prop_assert_eq!(base.cond_mean_y[level], perm.cond_mean_y[level]);
            }
            prop_assert_eq!(&base.cond_prob_x[level], &perm.cond_prob_x[level]);
        }
    }

    #[test]
    fn pooled_mean_identity(d in dataset_strategy()) {
        let stats = group_stats(&d).unwrap();
        let pooled: f64 = (0..d.m)
            .filter(|&i| stats.group_counts[i] > 0)
            .map(|i| stats.group_counts[i] as f64 * stats.cond_mean_y[i])
            .sum();
        let total: f64 = d.y.iter().sum();
        let max_abs = d.y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let tol = 1e-9 * d.len() as f64 * max_abs.max(1.0);
        prop_assert!((pooled - total).abs() <= tol);
    }

    #[test]
    fn choice_frequencies_are_exact_simplices(d in dataset_strategy()) {
        let stats = group_stats(&d).unwrap();
        for level in 0..d.m {
            if stats.group_counts[level] == 0 {
                continue;
            }
            let sum: f64 = stats.cond_prob_x[level].iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(stats.cond_prob_x[level].iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn local_fits_reproduce_polynomials(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        c in -3.0f64..3.0,
        bandwidth in 0.15f64..0.6,
    ) {
        let x: Vec<f64> = (0..300).map(|i| i as f64 / 299.0).collect();
        let grid = default_grid(0.0, 1.0, 21, 0.025);

        // affine target under a local-linear fit
        let y1: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let fit1 = fit_local_poly(&x, &y1, 1, bandwidth, &grid).unwrap();
        for gi in 0..grid.len() {
            prop_assert!(fit1.valid[gi]);
            prop_assert!((fit1.values[gi] - (a * grid[gi] + b)).abs() <= 1e-8);
            prop_assert!((fit1.derivs[gi] - a).abs() <= 1e-8);
        }

        // quadratic target under a local-quadratic fit
        let y2: Vec<f64> = x.iter().map(|v| a * v * v + b * v + c).collect();
        let fit2 = fit_local_poly(&x, &y2, 2, bandwidth, &grid).unwrap();
        for gi in 0..grid.len() {
            prop_assert!((fit2.values[gi] - (a * grid[gi] * grid[gi] + b * grid[gi] + c)).abs() <= 1e-8);
            prop_assert!((fit2.derivs[gi] - (2.0 * a * grid[gi] + b)).abs() <= 1e-8);
        }
    }

    #[test]
    fn probability_rows_stay_on_the_simplex(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ivkit::rng::root(seed);
        let n = 400;
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x: Vec<usize> = z.iter().map(|&v| {
            let p = 0.2 + 0.6 * v;
            if rng.gen_range(0.0..1.0) < p { 1 } else if rng.gen_range(0.0..1.0) < 0.3 { 2 } else { 0 }
        }).collect();
        let grid = default_grid(0.0, 1.0, 15, 0.025);
        let fit = fit_multiclass_probs(&z, &x, 3, 2, 0.35, &grid).unwrap();
        for gi in 0..grid.len() {
            if !fit.valid[gi] {
                continue;
            }
            let sum: f64 = fit.probs[gi].iter().sum();
            let dsum: f64 = fit.dprobs[gi].iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            prop_assert!(dsum.abs() <= 1e-9);
            prop_assert!(fit.probs[gi].iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }
}
