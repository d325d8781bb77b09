//! Small dense helpers on top of `nalgebra` used by the solver and the
//! formulation builders.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

/// Frobenius (trace) inner product `<A, B> = trace(A^T B)`.
pub fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `(A + A^T) / 2`, in place.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

pub fn eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    SymmetricEigen::new(a.clone()).eigenvalues
}

pub fn cholesky(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(a.clone())
}

/// Largest `alpha` in `(0, +inf]` with `X + alpha * dX` positive
/// semidefinite, given the Cholesky factor `L` of `X`.
pub fn psd_step_limit(chol_l: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let n = chol_l.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    // M = L^{-1} dX L^{-T}
    let left = chol_l
        .solve_lower_triangular(dx)
        .expect("Cholesky factor has a nonzero diagonal");
    let mt = chol_l
        .solve_lower_triangular(&left.transpose())
        .expect("Cholesky factor has a nonzero diagonal");
    let mut m = mt.transpose();
    symmetrize(&mut m);
    let lmin = min_eigenvalue(&m);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// Largest `alpha` with `x + alpha * dx >= 0` componentwise.
pub fn nonneg_step_limit(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn step_limit_matches_eigen_boundary() {
        let x = DMatrix::<f64>::identity(3, 3) * 2.0;
        let dx = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 0.5, -4.0]));
        let l = cholesky(&x).unwrap().l();
        assert_relative_eq!(psd_step_limit(&l, &dx), 0.5, epsilon = 1e-12);
        assert!(psd_step_limit(&l, &DMatrix::identity(3, 3)).is_infinite());
    }

    #[test]
    fn nonneg_ratio_test() {
        assert_relative_eq!(nonneg_step_limit(&[1.0, 2.0], &[-4.0, 1.0]), 0.25);
        assert!(nonneg_step_limit(&[1.0], &[0.0]).is_infinite());
    }
}
