//! Generator bases of SU(N).
//!
//! A basis is an ordered set of N^2 - 1 Hermitian traceless matrices with the
//! normalization Tr(L_i L_j) = 2 delta_ij. Together with the identity they
//! span the Hermitian N x N matrices, which is what makes the Bloch map a
//! bijection. Two determinations are provided: the generalized Gell-Mann
//! construction for any N, and the tensor-product determination for two
//! qubits, whose ordering makes the direct-sum split of bipartite Bloch
//! vectors explicit.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{EbrError, Result};
use crate::linalg::{hermiticity_deviation, max_abs, scale, CMatrix, C_I, C_ONE};
use crate::{linalg, tol};

/// How a [`GeneratorBasis`] was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determination {
    /// Generalized Gell-Mann matrices: symmetric block, antisymmetric block,
    /// diagonal block, each in lexicographic order.
    GellMann,
    /// Tensor products of Pauli matrices and the identity, for a
    /// `da x db` bipartite system.
    TensorProduct { da: usize, db: usize },
}

impl Determination {
    pub fn label(&self) -> &'static str {
        match self {
            Determination::GellMann => "gellmann",
            Determination::TensorProduct { .. } => "tensor",
        }
    }
}

/// An ordered SU(N) generator set; the coordinate frame of the Bloch map.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    n: usize,
    matrices: Vec<CMatrix>,
    c_n: f64,
    determination: Determination,
}

impl GeneratorBasis {
    /// Hilbert-space dimension N.
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Dimension N^2 - 1 of the Bloch space this basis coordinatizes.
    pub fn bloch_dim(&self) -> usize {
        self.n * self.n - 1
    }

    /// The constant c_N = sqrt(N(N-1)/2) entering the state expansion.
    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn determination(&self) -> Determination {
        self.determination
    }

    /// Wrap externally supplied matrices without checking the invariants.
    /// Pair with [`verify_basis`] when the matrices are untrusted.
    pub fn from_matrices_unchecked(
        n: usize,
        matrices: Vec<CMatrix>,
        determination: Determination,
    ) -> Self {
        Self {
            n,
            matrices,
            c_n: c_constant(n),
            determination,
        }
    }
}

/// c_N = sqrt(N(N-1)/2).
pub fn c_constant(n: usize) -> f64 {
    ((n * (n - 1)) as f64 / 2.0).sqrt()
}

/// Build the canonical generalized Gell-Mann basis of SU(N).
///
/// Ordering: E_jk + E_kj for j < k, then -i(E_jk - E_kj) for j < k, both
/// lexicographic in (j, k), then the N - 1 diagonal matrices
/// sqrt(2/(l(l+1))) (sum_{m<=l} E_mm - l E_{l+1,l+1}) for l = 1..N-1.
/// For N = 2 this is exactly (sigma_1, sigma_2, sigma_3).
pub fn build_gell_mann(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(EbrError::InvalidDimension(n));
    }
    let mut matrices = Vec::with_capacity(n * n - 1);

    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = C_ONE;
            m[(k, j)] = C_ONE;
            matrices.push(m);
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = -C_I;
            m[(k, j)] = C_I;
            matrices.push(m);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for d in 0..l {
            m[(d, d)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        matrices.push(m);
    }

    Ok(GeneratorBasis {
        n,
        matrices,
        c_n: c_constant(n),
        determination: Determination::GellMann,
    })
}

/// Build the tensor-product determination for a 2 x 2 bipartite system.
///
/// The 15 generators come in three blocks: (1/sqrt2) sigma_a (x) I,
/// (1/sqrt2) I (x) sigma_b, then (1/sqrt2) sigma_a (x) sigma_b with (a, b)
/// in row-major order. Dimensions other than 2 x 2 are rejected.
pub fn build_tensor_basis(da: usize, db: usize) -> Result<GeneratorBasis> {
    if da != 2 || db != 2 {
        return Err(EbrError::UnsupportedTensorDimensions { da, db });
    }
    let s = linalg::pauli();
    let id = linalg::identity(2);
    let f = std::f64::consts::FRAC_1_SQRT_2;

    let mut matrices = Vec::with_capacity(15);
    for sa in &s {
        matrices.push(scale(&sa.kronecker(&id), f));
    }
    for sb in &s {
        matrices.push(scale(&id.kronecker(sb), f));
    }
    for sa in &s {
        for sb in &s {
            matrices.push(scale(&sa.kronecker(sb), f));
        }
    }

    Ok(GeneratorBasis {
        n: 4,
        matrices,
        c_n: c_constant(4),
        determination: Determination::TensorProduct { da, db },
    })
}

/// Structural check of a generator basis against the module tolerances.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// max over i of max |L_i - L_i^dagger| entry.
    pub hermiticity: f64,
    /// max over i of |Tr L_i|.
    pub tracelessness: f64,
    /// max over (i, j) of |Tr(L_i L_j) - 2 delta_ij|.
    pub gram: f64,
    /// Whether the list has N^2 - 1 entries of shape N x N.
    pub count_ok: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Measure how far `basis` deviates from Hermiticity, tracelessness and the
/// Gram condition Tr(L_i L_j) = 2 delta_ij.
pub fn verify_basis(basis: &GeneratorBasis) -> ValidationReport {
    let n = basis.dimension();
    let mut hermiticity = 0.0_f64;
    let mut tracelessness = 0.0_f64;
    let mut gram = 0.0_f64;

    let count_ok = basis.matrices.len() == n * n - 1
        && basis
            .matrices
            .iter()
            .all(|m| m.nrows() == n && m.ncols() == n);

    for m in &basis.matrices {
        hermiticity = hermiticity.max(hermiticity_deviation(m));
        tracelessness = tracelessness.max(m.trace().norm());
    }
    if count_ok {
        for (i, a) in basis.matrices.iter().enumerate() {
            for (j, b) in basis.matrices.iter().enumerate() {
                let target = if i == j { 2.0 } else { 0.0 };
                let t = (a * b).trace();
                gram = gram.max((Complex64::new(target, 0.0) - t).norm());
            }
        }
    }

    let tolerance = tol::STRUCTURAL;
    let pass =
        count_ok && hermiticity <= tolerance && tracelessness <= tolerance && gram <= tolerance;
    ValidationReport {
        hermiticity,
        tracelessness,
        gram,
        count_ok,
        tolerance,
        pass,
    }
}

/// Expand real coefficients in the basis: sum_i r_i L_i.
pub(crate) fn expand(basis: &GeneratorBasis, coefficients: &[f64]) -> CMatrix {
    let n = basis.dimension();
    let mut acc = CMatrix::zeros(n, n);
    for (m, &c) in basis.matrices.iter().zip(coefficients) {
        acc += scale(m, c);
    }
    acc
}

/// max |entry| over all generators.
pub fn magnitude(basis: &GeneratorBasis) -> f64 {
    basis.matrices.iter().map(max_abs).fold(0.0, f64::max)
}
