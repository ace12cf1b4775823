//! Conversions between `ndarray` (the public matrix currency of this crate)
//! and `nalgebra` (used internally for eigendecompositions and solves).

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};

pub(crate) fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[[r, c]])
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(r, c)| m[(r, c)])
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending
/// with eigenvector columns reordered to match.
pub(crate) fn sym_eigen_desc(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let eig = to_na(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("symmetric eigenvalues of finite input are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Solve `a x = b` for symmetric positive definite `a` via Cholesky.
pub(crate) fn solve_spd(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let chol = to_na(a).cholesky().ok_or_else(|| {
        Error::Numerical(
            "matrix is not positive definite; cannot solve the linear system".to_string(),
        )
    })?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}

/// Invert a small symmetric positive definite matrix via Cholesky.
pub(crate) fn invert_spd(a: &Array2<f64>) -> Result<Array2<f64>> {
    let chol = to_na(a).cholesky().ok_or_else(|| {
        Error::Numerical("matrix is not positive definite; cannot invert".to_string())
    })?;
    Ok(from_na(&chol.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn eigen_reconstructs_symmetric_matrix() {
        let a = array![[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let (values, vectors) = sym_eigen_desc(&a).unwrap();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let lambda = Array2::from_diag(&ndarray::Array1::from(values));
        let rebuilt = vectors.dot(&lambda).dot(&vectors.t());
        for (x, y) in rebuilt.iter().zip(a.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn spd_solve_matches_known_solution() {
        let a = array![[2.0, 0.5], [0.5, 1.0]];
        let x_true = [1.0, -2.0];
        let b = [2.0 * 1.0 + 0.5 * -2.0, 0.5 * 1.0 + 1.0 * -2.0];
        let x = solve_spd(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], x_true[0], epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], x_true[1], epsilon = 1e-12);
    }

    #[test]
    fn spd_inverse_times_matrix_is_identity() {
        let a = array![[3.0, 1.0], [1.0, 2.0]];
        let inv = invert_spd(&a).unwrap();
        let prod = a.dot(&inv);
        assert_abs_diff_eq!(prod[[0, 0]], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(prod[[0, 1]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(prod[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(prod[[1, 1]], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn non_spd_solve_reports_numerical_error() {
        let a = array![[1.0, 2.0], [2.0, 1.0]]; // indefinite
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::Numerical(_))
        ));
    }
}
