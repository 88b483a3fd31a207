// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra helpers shared by the engines.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Operator (spectral) norm of a complex matrix.
///
/// The matrix is rescaled by its largest entry first so that tiny, heavily
/// damped operators do not lose precision in `M†M`.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    let scale = m.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let scaled = m.map(|z| z / scale);
    let gram = scaled.adjoint() * &scaled;
    let top = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .fold(0.0_f64, |a, &l| a.max(l));
    scale * top.max(0.0).sqrt()
}

pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let mut values: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// `½ ‖a - b‖₁` for Hermitian arguments.
pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|l| l.abs())
        .sum::<f64>()
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &DMatrix<Complex64>) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_scaled_pauli() {
        let z = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                ZERO,
                ZERO,
                Complex64::new(-1.0, 0.0),
            ],
        );
        assert!((operator_norm(&z) - 1.0).abs() < 1e-14);
        let tiny = z.map(|v| v * 1e-300);
        assert!((operator_norm(&tiny) / 1e-300 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            ZERO,
        ]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ZERO,
            Complex64::new(1.0, 0.0),
        ]));
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-14);
    }
}
