//! Bipartite states and the direct-sum split of their Bloch vectors.
//!
//! In the tensor-product determination the 15-dimensional Bloch vector of a
//! two-qubit state splits as r = (1/sqrt3) r_A (+) (1/sqrt3) r_B (+) r_corr:
//! the first two blocks are the Bloch vectors of the reduced states, the
//! 9-component remainder carries the correlations. Both sub-entities thus
//! keep well-defined states even when the joint state is entangled; only for
//! product states is the correlation block determined by the parts.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{EbrError, Result};
use crate::linalg::{CMatrix, CVector};
use crate::state_space::{BlochVector, DensityMatrix};
use crate::su_basis::{Determination, GeneratorBasis};

/// Amplitudes and phase of the entangled family
/// a1 |+->  +  a2 e^(i alpha) |-+>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledParams {
    a1: f64,
    a2: f64,
    alpha: f64,
}

impl EntangledParams {
    /// Requires 0 <= a1, a2 <= 1 and a1^2 + a2^2 = 1.
    pub fn new(a1: f64, a2: f64, alpha: f64) -> Result<Self> {
        let norm = a1 * a1 + a2 * a2;
        if !(0.0..=1.0).contains(&a1) || !(0.0..=1.0).contains(&a2) || (norm - 1.0).abs() > 1e-12 {
            return Err(EbrError::NormalizationViolation(norm));
        }
        Ok(Self { a1, a2, alpha })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// A two-qubit state with its joint density matrix (A-major index order:
/// |++>, |+->, |-+>, |-->).
#[derive(Debug, Clone)]
pub struct BipartiteState {
    da: usize,
    db: usize,
    joint: DensityMatrix,
}

impl BipartiteState {
    pub fn new(da: usize, db: usize, joint: DensityMatrix) -> Result<Self> {
        if joint.dimension() != da * db {
            return Err(EbrError::DimensionMismatch {
                left: joint.dimension(),
                right: da * db,
                context: "joint state dimension must be dA * dB",
            });
        }
        Ok(Self { da, db, joint })
    }

    pub fn subsystem_dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    pub fn joint(&self) -> &DensityMatrix {
        &self.joint
    }
}

/// Which subsystem a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Build the pure state a1 |+-> + a2 e^(i alpha) |-+> as a projector.
pub fn build_entangled(p: &EntangledParams) -> BipartiteState {
    let mut psi = CVector::zeros(4);
    psi[1] = Complex64::new(p.a1, 0.0);
    psi[2] = Complex64::from_polar(p.a2, p.alpha);
    let joint = DensityMatrix::new_unchecked(&psi * psi.adjoint());
    BipartiteState {
        da: 2,
        db: 2,
        joint,
    }
}

/// The singlet state (|+-> - |-+>)/sqrt2, realized as a1 = a2 = 1/sqrt2,
/// alpha = pi.
pub fn singlet() -> BipartiteState {
    let p = EntangledParams::new(
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::PI,
    )
    .expect("normalized by construction");
    build_entangled(&p)
}

/// Trace out one subsystem of a bipartite state.
pub fn partial_trace(s: &BipartiteState, keep: Subsystem) -> DensityMatrix {
    let (da, db) = (s.da, s.db);
    let joint = s.joint.matrix();
    let mat = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| joint[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| joint[(k * db + i, k * db + j)]).sum()
        }),
    };
    DensityMatrix::new_unchecked(mat)
}

/// The three blocks of a two-qubit Bloch vector in the tensor determination.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedBloch {
    /// Bloch vector of subsystem A (3 components).
    pub r_a: DVector<f64>,
    /// Bloch vector of subsystem B (3 components).
    pub r_b: DVector<f64>,
    /// Correlation block (9 components, row-major in (a, b)).
    pub r_corr: DVector<f64>,
}

impl DecomposedBloch {
    /// Reassemble the 15-vector (1/sqrt3) r_A (+) (1/sqrt3) r_B (+) r_corr.
    pub fn reassemble(&self) -> BlochVector {
        let s = 3.0_f64.sqrt().recip();
        let mut v = DVector::zeros(15);
        for i in 0..3 {
            v[i] = s * self.r_a[i];
            v[3 + i] = s * self.r_b[i];
        }
        for i in 0..9 {
            v[6 + i] = self.r_corr[i];
        }
        BlochVector::new(4, v).expect("length 15")
    }
}

/// Split a 15-dimensional Bloch vector computed in the tensor-ordered basis
/// into subsystem and correlation parts.
pub fn decompose_direct_sum(r: &BlochVector, basis: &GeneratorBasis) -> Result<DecomposedBloch> {
    match basis.determination() {
        Determination::TensorProduct { da: 2, db: 2 } => {}
        other => {
            return Err(EbrError::WrongDetermination {
                expected: "tensor",
                got: match other {
                    Determination::GellMann => "gellmann",
                    Determination::TensorProduct { .. } => "tensor (unsupported dims)",
                },
            })
        }
    }
    if r.dimension() != 4 {
        return Err(EbrError::DimensionMismatch {
            left: r.dimension(),
            right: 4,
            context: "direct-sum split needs a two-qubit Bloch vector",
        });
    }
    let c = r.components();
    let s = 3.0_f64.sqrt();
    Ok(DecomposedBloch {
        r_a: DVector::from_fn(3, |i, _| s * c[i]),
        r_b: DVector::from_fn(3, |i, _| s * c[3 + i]),
        r_corr: DVector::from_fn(9, |i, _| c[6 + i]),
    })
}

/// Whether the correlation block is exactly the one a product state would
/// have: r_corr(a, b) = r_A(a) r_B(b) / sqrt3.
pub fn is_product(d: &DecomposedBloch, tolerance: f64) -> bool {
    let s = 3.0_f64.sqrt().recip();
    for a in 0..3 {
        for b in 0..3 {
            let want = s * d.r_a[a] * d.r_b[b];
            if (d.r_corr[3 * a + b] - want).abs() > tolerance {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, max_abs_diff};
    use crate::rng::RandomSource;
    use crate::state_space::{random_mixed, random_pure, to_bloch};
    use crate::su_basis::{build_gell_mann, build_tensor_basis};
    use crate::tol;

    #[test]
    fn params_require_normalization() {
        assert!(EntangledParams::new(0.9, 0.9, 0.0).is_err());
        assert!(EntangledParams::new(-0.5, 0.866, 0.0).is_err());
        assert!(EntangledParams::new(1.0, 0.0, 0.3).is_ok());
    }

    #[test]
    fn degenerate_amplitude_gives_product_state() {
        let p = EntangledParams::new(1.0, 0.0, 0.0).unwrap();
        let s = build_entangled(&p);
        // |+-><+-| = diag(0, 1, 0, 0)
        let mut want = CMatrix::zeros(4, 4);
        want[(1, 1)] = Complex64::new(1.0, 0.0);
        assert!(max_abs_diff(s.joint().matrix(), &want) < 1e-15);
    }

    #[test]
    fn singlet_matrix_is_correct() {
        let s = singlet();
        let h = Complex64::new(0.5, 0.0);
        let mut want = CMatrix::zeros(4, 4);
        want[(1, 1)] = h;
        want[(2, 2)] = h;
        want[(1, 2)] = -h;
        want[(2, 1)] = -h;
        assert!(max_abs_diff(s.joint().matrix(), &want) < 1e-15);
    }

    #[test]
    fn entangled_states_are_pure() {
        for (a1, alpha) in [(0.3, 0.7), (0.8, -1.2), (0.5f64.sqrt(), 2.0)] {
            let a2 = (1.0 - a1 * a1).sqrt();
            let p = EntangledParams::new(a1, a2, alpha).unwrap();
            let s = build_entangled(&p);
            assert!((s.joint().purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_marginals_are_maximally_mixed() {
        let s = singlet();
        let half = linalg::scale(&linalg::identity(2), 0.5);
        assert!(max_abs_diff(partial_trace(&s, Subsystem::A).matrix(), &half) < 1e-15);
        assert!(max_abs_diff(partial_trace(&s, Subsystem::B).matrix(), &half) < 1e-15);
    }

    #[test]
    fn partial_trace_recovers_product_factors() {
        let mut rng = RandomSource::from_seed(41);
        let da = random_mixed(2, &mut rng);
        let db = random_mixed(2, &mut rng);
        let joint = DensityMatrix::new_unchecked(da.matrix().kronecker(db.matrix()));
        let s = BipartiteState::new(2, 2, joint).unwrap();
        assert!(max_abs_diff(partial_trace(&s, Subsystem::A).matrix(), da.matrix()) < 1e-14);
        assert!(max_abs_diff(partial_trace(&s, Subsystem::B).matrix(), db.matrix()) < 1e-14);
    }

    #[test]
    fn entangled_family_marginal_is_diagonal() {
        let (a1, a2) = (0.6, 0.8);
        let p = EntangledParams::new(a1, a2, 1.1).unwrap();
        let s = build_entangled(&p);
        let ra = partial_trace(&s, Subsystem::A);
        let mut want = CMatrix::zeros(2, 2);
        want[(0, 0)] = Complex64::new(a1 * a1, 0.0);
        want[(1, 1)] = Complex64::new(a2 * a2, 0.0);
        assert!(max_abs_diff(ra.matrix(), &want) < 1e-14);
    }

    #[test]
    fn singlet_decomposition() {
        let basis = build_tensor_basis(2, 2).unwrap();
        let s = singlet();
        let r = to_bloch(s.joint(), &basis).unwrap();
        let d = decompose_direct_sum(&r, &basis).unwrap();
        assert!(d.r_a.norm() < 1e-12);
        assert!(d.r_b.norm() < 1e-12);
        // correlation block: -1/sqrt3 on the (a, a) slots, 0 elsewhere
        let m = 3.0_f64.sqrt().recip();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { -m } else { 0.0 };
                assert!(
                    (d.r_corr[3 * a + b] - want).abs() < 1e-12,
                    "corr({a},{b}) = {}",
                    d.r_corr[3 * a + b]
                );
            }
        }
        assert!((d.r_corr.norm() - 1.0).abs() < 1e-12);
        assert!(!is_product(&d, tol::GEOMETRY));
    }

    #[test]
    fn product_state_decomposition() {
        let mut rng = RandomSource::from_seed(42);
        let basis = build_tensor_basis(2, 2).unwrap();
        let da = random_pure(2, &mut rng);
        let db = random_pure(2, &mut rng);
        let joint = DensityMatrix::new_unchecked(da.matrix().kronecker(db.matrix()));
        let r = to_bloch(&joint, &basis).unwrap();
        let d = decompose_direct_sum(&r, &basis).unwrap();
        assert!((d.r_a.norm() - 1.0).abs() < 1e-12);
        assert!((d.r_b.norm() - 1.0).abs() < 1e-12);
        assert!((d.r_corr.norm_squared() - 1.0 / 3.0).abs() < 1e-12);
        assert!(is_product(&d, tol::GEOMETRY));
        // the full vector is unit length for a pure bipartite state
        assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subsystem_blocks_match_partial_traces() {
        let mut rng = RandomSource::from_seed(43);
        let tensor = build_tensor_basis(2, 2).unwrap();
        let pauli_basis = build_gell_mann(2).unwrap();
        for _ in 0..20 {
            let joint = random_mixed(4, &mut rng);
            let s = BipartiteState::new(2, 2, joint.clone()).unwrap();
            let r = to_bloch(&joint, &tensor).unwrap();
            let d = decompose_direct_sum(&r, &tensor).unwrap();
            let ra = to_bloch(&partial_trace(&s, Subsystem::A), &pauli_basis).unwrap();
            let rb = to_bloch(&partial_trace(&s, Subsystem::B), &pauli_basis).unwrap();
            assert!((d.r_a.clone() - ra.components()).norm() < tol::GEOMETRY);
            assert!((d.r_b.clone() - rb.components()).norm() < tol::GEOMETRY);

            // norm bookkeeping of the orthogonal direct sum
            let total =
                d.r_a.norm_squared() / 3.0 + d.r_b.norm_squared() / 3.0 + d.r_corr.norm_squared();
            assert!((total - r.norm() * r.norm()).abs() < 1e-12);

            // reassembly round-trips
            assert!((d.reassemble().components() - r.components()).norm() < 1e-13);
        }
    }

    #[test]
    fn entangled_family_is_not_product() {
        let basis = build_tensor_basis(2, 2).unwrap();
        let p = EntangledParams::new(0.6, 0.8, 0.4).unwrap();
        let s = build_entangled(&p);
        let r = to_bloch(s.joint(), &basis).unwrap();
        let d = decompose_direct_sum(&r, &basis).unwrap();
        assert!(!is_product(&d, tol::GEOMETRY));
    }

    #[test]
    fn wrong_determination_is_rejected() {
        let gm4 = build_gell_mann(4).unwrap();
        let s = singlet();
        let r = to_bloch(s.joint(), &gm4).unwrap();
        assert!(matches!(
            decompose_direct_sum(&r, &gm4),
            Err(EbrError::WrongDetermination { .. })
        ));
    }
}
