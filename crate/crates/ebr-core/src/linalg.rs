//! Small complex-matrix helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex identity matrix.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// The Pauli matrices (sigma_1, sigma_2, sigma_3).
pub fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]),
        CMatrix::from_row_slice(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO]),
        CMatrix::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE]),
    ]
}

/// sigma . n for a real 3-vector n.
pub fn pauli_dot(n: &[f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(n[2], 0.0),
            Complex64::new(n[0], -n[1]),
            Complex64::new(n[0], n[1]),
            Complex64::new(-n[2], 0.0),
        ],
    )
}

/// Largest |entry| of `m`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest |a_ij - b_ij|.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

/// Largest |m - m^dagger| entry; zero for Hermitian matrices.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Scale a complex matrix by a real factor.
pub fn scale(m: &CMatrix, x: f64) -> CMatrix {
    m.map(|c| c * x)
}

/// Largest |a_i - b_i| over two real vectors.
pub fn max_abs_diff_real(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).iter().map(|x| x.abs()).fold(0.0, f64::max)
}
