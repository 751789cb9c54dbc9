//! Small dense helpers shared by the simulation back-ends.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// `exp(-i * scale * H)` for Hermitian `H`, via eigendecomposition. Exact at
/// these sizes; diagonal matrices take the elementwise fast path.
pub fn hermitian_exp(h: &DMatrix<Complex64>, scale: f64) -> DMatrix<Complex64> {
    let dim = h.nrows();
    assert_eq!(dim, h.ncols(), "square matrix required");
    if is_diagonal(h) {
        let mut out = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            out[(i, i)] = (-Complex64::i() * scale * h[(i, i)].re).exp();
        }
        return out;
    }
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        dim,
        eig.eigenvalues
            .iter()
            .map(|&l| (-Complex64::i() * scale * l).exp()),
    );
    let q = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(dim, dim, |r, c| q[(r, c)] * phases[c]);
    scaled * q.adjoint()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_spectral_norm(h: &DMatrix<Complex64>) -> f64 {
    h.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()))
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    let dim = m.nrows();
    let mut result = DMatrix::identity(dim, dim);
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c && m[(r, c)] != Complex64::new(0.0, 0.0) {
                return false;
            }
        }
    }
    true
}
