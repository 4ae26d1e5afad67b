//! Density matrices, Bloch vectors, and the maps between them.
//!
//! The expansion D(r) = (1/N)(I + c_N r . L) identifies states with real
//! vectors in the unit ball of R^(N^2-1). For N > 2 the image of the ball is
//! larger than the state space: a vector can have norm <= 1 and still fail
//! positive semi-definiteness. [`classify`] decides membership pointwise by
//! an eigenvalue check.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{EbrError, Result};
use crate::linalg::{hermiticity_deviation, scale, CMatrix, CVector};
use crate::rng::RandomSource;
use crate::su_basis::{self, GeneratorBasis};
use crate::tol;

/// A validated density matrix: Hermitian, unit trace, positive semi-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap a matrix. Hermiticity and unit trace are checked at
    /// the structural tolerance, eigenvalues down to -[`tol::PSD`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || mat.ncols() != n {
            return Err(EbrError::DimensionMismatch {
                left: n,
                right: mat.ncols(),
                context: "density matrix must be square",
            });
        }
        let herm = hermiticity_deviation(&mat);
        if herm > tol::STRUCTURAL {
            return Err(EbrError::NotHermitian { deviation: herm });
        }
        let tr = mat.trace();
        let tr_dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_dev > tol::STRUCTURAL {
            return Err(EbrError::TraceNotOne { deviation: tr_dev });
        }
        let min_eig = mat
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol::PSD {
            return Err(EbrError::NotAState {
                min_eigenvalue: min_eig,
                tol: tol::PSD,
            });
        }
        Ok(Self { n, mat })
    }

    /// Wrap a matrix that is a valid state by construction (projectors,
    /// normalized Gaussian ensembles, Lueders updates).
    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        debug_assert!(hermiticity_deviation(&mat) <= 1e-9);
        let n = mat.nrows();
        Self { n, mat }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Tr(D^2), computed directly from the matrix.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// A real vector of length N^2 - 1; the Bloch-space coordinates of a state
/// (or of any Hermitian unit-trace matrix, state or not).
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    n: usize,
    components: DVector<f64>,
}

impl BlochVector {
    pub fn new(n: usize, components: DVector<f64>) -> Result<Self> {
        if components.len() != n * n - 1 {
            return Err(EbrError::DimensionMismatch {
                left: components.len(),
                right: n * n - 1,
                context: "Bloch vector length must be N^2 - 1",
            });
        }
        Ok(Self { n, components })
    }

    pub fn from_slice(n: usize, components: &[f64]) -> Result<Self> {
        Self::new(n, DVector::from_row_slice(components))
    }

    /// The origin: the maximally mixed state I/N.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            components: DVector::zeros(n * n - 1),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }

    /// Tr(D^2) through the norm: (1/N)(1 + (N-1)|r|^2).
    pub fn purity(&self) -> f64 {
        let n = self.n as f64;
        (1.0 + (n - 1.0) * self.components.norm_squared()) / n
    }
}

/// Membership of a Bloch vector in the convex state region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Rank-1 state on the unit sphere.
    VectorState,
    /// State strictly inside the convex region.
    OperatorState,
    /// Hermitian unit-trace image with a negative eigenvalue.
    NotAState,
}

fn check_dims(n: usize, basis: &GeneratorBasis, context: &'static str) -> Result<()> {
    if n != basis.dimension() {
        return Err(EbrError::DimensionMismatch {
            left: n,
            right: basis.dimension(),
            context,
        });
    }
    Ok(())
}

/// Bloch coordinates of a density matrix: r_i = (N / 2 c_N) Re Tr(D L_i).
pub fn to_bloch(d: &DensityMatrix, basis: &GeneratorBasis) -> Result<BlochVector> {
    check_dims(d.dimension(), basis, "to_bloch: state vs basis")?;
    let n = basis.dimension() as f64;
    let coeff = n / (2.0 * basis.c_n());
    let components = DVector::from_iterator(
        basis.bloch_dim(),
        basis
            .matrices()
            .iter()
            .map(|l| coeff * (d.matrix() * l).trace().re),
    );
    Ok(BlochVector {
        n: basis.dimension(),
        components,
    })
}

/// The matrix D(r) = (1/N)(I + c_N sum_i r_i L_i).
///
/// Always Hermitian with unit trace, but positive semi-definite only when
/// `r` lies in the state region; use [`classify`] or [`density_from_bloch`]
/// to decide.
pub fn from_bloch(r: &BlochVector, basis: &GeneratorBasis) -> Result<CMatrix> {
    check_dims(r.dimension(), basis, "from_bloch: vector vs basis")?;
    let n = basis.dimension();
    let mut m = su_basis::expand(basis, r.components.as_slice());
    m = scale(&m, basis.c_n());
    m += CMatrix::identity(n, n);
    Ok(scale(&m, 1.0 / n as f64))
}

/// Decide whether `r` is a vector-state, an operator-state, or no state at
/// all, by eigen-decomposing D(r).
pub fn classify(r: &BlochVector, basis: &GeneratorBasis, tolerance: f64) -> Result<StateKind> {
    let m = from_bloch(r, basis)?;
    let min_eig = m
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -tolerance {
        return Ok(StateKind::NotAState);
    }
    if (r.norm() - 1.0).abs() <= tolerance {
        Ok(StateKind::VectorState)
    } else {
        Ok(StateKind::OperatorState)
    }
}

/// [`from_bloch`] followed by the state checks; errors with
/// [`EbrError::NotAState`] when `r` is outside the convex region.
pub fn density_from_bloch(r: &BlochVector, basis: &GeneratorBasis) -> Result<DensityMatrix> {
    let m = from_bloch(r, basis)?;
    DensityMatrix::new(m)
}

/// Haar-random pure state as a rank-1 projector.
pub fn random_pure(n: usize, rng: &mut RandomSource) -> DensityMatrix {
    let v = CVector::from_iterator(
        n,
        (0..n).map(|_| Complex64::new(rng.normal(), rng.normal())),
    );
    let norm = v.norm();
    let v = v.map(|c| c / norm);
    let mat = &v * v.adjoint();
    DensityMatrix::new_unchecked(mat)
}

/// Hilbert-Schmidt-random mixed state: G G^dagger / Tr(G G^dagger).
pub fn random_mixed(n: usize, rng: &mut RandomSource) -> DensityMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.normal(), rng.normal()));
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    DensityMatrix::new_unchecked(scale(&gg, 1.0 / tr))
}
