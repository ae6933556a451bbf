//! Small dense matrix helpers for `n ≤ 3` Hessians and `(n+1)×(n+1)`
//! bordered matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Determinant by explicit cofactor formulas up to 3×3, LU beyond.
pub fn det(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().determinant(),
    }
}

pub fn inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().try_inverse()
}

/// Smallest eigenvalue of a symmetric matrix (closed form for n ≤ 2).
pub fn sym_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)],
        2 => {
            let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let mean = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            mean - rad
        }
        _ => SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
    }
}

pub fn sym_max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    -sym_min_eigenvalue(&(-m))
}

/// Symmetric eigen-decomposition with eigenvalues ascending and each
/// eigenvector's first non-negligible component made positive. Columns of
/// the returned matrix are the eigenvectors.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                v = -v;
            }
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Elementary symmetric polynomial `σ_k` of `values` (`σ_0 = 1`).
pub fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}
