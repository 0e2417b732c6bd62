//! Dense linear-algebra helpers shared by the estimators.
//!
//! Rank decisions use a relative singular-value threshold: the numerical
//! rank at tolerance `tol` is the number of singular values exceeding
//! `tol * sigma_max`.

use nalgebra::{DMatrix, DVector};

/// Outcome of a singular-value least-squares solve.
#[derive(Debug, Clone)]
pub struct Lstsq {
    /// Minimum-norm least-squares solution.
    pub solution: Vec<f64>,
    /// Numerical rank at the requested tolerance.
    pub rank: usize,
    /// Ratio of largest to smallest singular value (infinite when the
    /// smallest is zero).
    pub cond: f64,
    /// `||A x - b||_2`.
    pub residual_norm: f64,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
}

/// Build a `DMatrix` from row slices.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

/// Numerical rank and condition number of `a` at relative tolerance `tol`.
pub fn rank_and_cond(a: &DMatrix<f64>, tol: f64) -> (usize, f64) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (0, f64::INFINITY);
    }
    let sv = a.clone().singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return (0, f64::INFINITY);
    }
    let min = sv.min();
    let rank = sv.iter().filter(|&&s| s > tol * max).count();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    (rank, cond)
}

/// Minimum-norm least squares via SVD, truncating singular values below
/// `tol * sigma_max`.
pub fn svd_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Lstsq {
    let n = a.ncols();
    let svd = a.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol * max).count();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };

    let solution = if max > 0.0 {
        let u = svd.u.as_ref().expect("svd with u");
        let vt = svd.v_t.as_ref().expect("svd with v_t");
        // x = V S^+ U^T b with truncated inversion
        let utb = u.transpose() * b;
        let mut scaled = DVector::zeros(svd.singular_values.len());
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > tol * max {
                scaled[i] = utb[i] / s;
            }
        }
        let x = vt.transpose() * scaled;
        x.iter().copied().collect()
    } else {
        vec![0.0; n]
    };

    let x = DVector::from_vec(solution.clone());
    let residual_norm = (a * &x - b).norm();
    Lstsq {
        solution,
        rank,
        cond,
        residual_norm,
        singular_values: sv,
    }
}

/// Orthonormal basis of the (near-)null space of `a` at relative
/// tolerance `tol`, from the eigenvectors of `a^T a`.
pub fn null_basis(a: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let n = a.ncols();
    if n == 0 {
        return vec![];
    }
    let gram = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cut = (tol * tol) * max_ev.max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= cut {
            basis.push(eig.eigenvectors.column(i).iter().copied().collect());
        }
    }
    basis
}

/// Solve the small symmetric positive-definite system `m x = rhs` in
/// place via Cholesky. `m` is row-major `n x n`. Returns `None` when the
/// factorization breaks down (rank-deficient window).
pub fn solve_spd_small(m: &[f64], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(rhs.len(), n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // forward then back substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}

/// Ridge-regularized least squares for first-kind systems:
/// minimize `||q s - rhs||^2 + lambda ||d s||^2`.
/// Returns `(s, residual_norm, seminorm)` where `seminorm = ||d s||`.
pub fn ridge_solve(
    q: &DMatrix<f64>,
    d: &DMatrix<f64>,
    rhs: &DVector<f64>,
    lambda: f64,
) -> (DVector<f64>, f64, f64) {
    let normal = q.transpose() * q + d.transpose() * d * lambda;
    let qtb = q.transpose() * rhs;
    let s = normal
        .clone()
        .cholesky()
        .map(|c| c.solve(&qtb))
        .unwrap_or_else(|| {
            normal
                .lu()
                .solve(&qtb)
                .unwrap_or_else(|| DVector::zeros(q.ncols()))
        });
    let residual = (q * &s - rhs).norm();
    let seminorm = (d * &s).norm();
    (s, residual, seminorm)
}
