//! Observables, their spectral decompositions, and measurement simplexes.
//!
//! In Bloch space the N rank-1 eigenprojectors of a non-degenerate observable
//! map to N unit vectors with pairwise inner product -1/(N-1): the vertices
//! of an (N-1)-simplex inscribed in the unit sphere. That simplex is the
//! potentiality region the hidden-measurement dynamics operates on.
//! Degenerate observables are handled as a non-degenerate refinement plus an
//! outcome grouping that fuses regions.

use nalgebra::DVector;

use crate::error::{EbrError, Result};
use crate::linalg::{hermiticity_deviation, CMatrix};
use crate::state_space::{to_bloch, DensityMatrix};
use crate::su_basis::{Determination, GeneratorBasis};

/// Full eigensystem of a Hermitian matrix, eigenvalues descending, with
/// rank-1 projectors built from the orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
    /// Columns are the eigenvectors, in eigenvalue order.
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Unitary whose columns are the eigenvectors; conjugating by its
    /// adjoint moves matrices into the eigenbasis.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// sum_i o_i P_i.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dimension();
        let mut acc = CMatrix::zeros(n, n);
        for (o, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc += p.map(|c| c * *o);
        }
        acc
    }
}

/// Eigen-decompose a Hermitian matrix into N rank-1 projectors.
///
/// Degenerate eigenvalues get an arbitrary orthonormal refinement from the
/// eigensolver; exact ties in the descending order are broken by
/// lexicographic comparison of the eigenvector components.
pub fn spectral_decompose(o: &CMatrix, tolerance: f64) -> Result<SpectralDecomposition> {
    let deviation = hermiticity_deviation(o);
    if deviation > tolerance {
        return Err(EbrError::NotHermitian { deviation });
    }
    let n = o.nrows();
    // work on the symmetrized matrix so tiny anti-Hermitian noise cannot leak
    let sym = (o + o.adjoint()).map(|c| c * 0.5);
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then_with(|| {
                let va = eig.eigenvectors.column(a);
                let vb = eig.eigenvectors.column(b);
                for (x, y) in va.iter().zip(vb.iter()) {
                    match x.re.partial_cmp(&y.re).unwrap() {
                        std::cmp::Ordering::Equal => {}
                        other => return other,
                    }
                    match x.im.partial_cmp(&y.im).unwrap() {
                        std::cmp::Ordering::Equal => {}
                        other => return other,
                    }
                }
                std::cmp::Ordering::Equal
            })
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut projectors = Vec::with_capacity(n);
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (slot, &idx) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        eigenvalues.push(eig.eigenvalues[idx]);
        projectors.push(v * v.adjoint());
        eigenvectors.set_column(slot, &v);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        eigenvectors,
    })
}

/// The potentiality region of a measurement: N unit vertex vectors in Bloch
/// space plus the projectors they represent.
#[derive(Debug, Clone)]
pub struct MeasurementSimplex {
    n: usize,
    vertices: Vec<DVector<f64>>,
    projectors: Vec<CMatrix>,
    eigenvalues: Vec<f64>,
    basis: GeneratorBasis,
}

impl MeasurementSimplex {
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// The vertex vectors n_i, unit length, Gram n_i . n_j = (N d_ij - 1)/(N - 1).
    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Eigenvalues of the decomposed observable, one per vertex, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The generator basis the vertices are coordinatized in.
    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    /// Identity of the underlying basis: (dimension, determination).
    pub fn basis_ref(&self) -> (usize, Determination) {
        (self.basis.dimension(), self.basis.determination())
    }
}

/// Map a spectral decomposition to its measurement simplex: n_i is the Bloch
/// vector of the eigenprojector P_i.
pub fn simplex_of(
    decomp: &SpectralDecomposition,
    basis: &GeneratorBasis,
) -> Result<MeasurementSimplex> {
    let n = decomp.dimension();
    if n != basis.dimension() {
        return Err(EbrError::DimensionMismatch {
            left: n,
            right: basis.dimension(),
            context: "simplex_of: decomposition vs basis",
        });
    }
    let mut vertices = Vec::with_capacity(n);
    for p in decomp.projectors() {
        let d = DensityMatrix::new_unchecked(p.clone());
        vertices.push(to_bloch(&d, basis)?.components().clone());
    }
    Ok(MeasurementSimplex {
        n,
        vertices,
        projectors: decomp.projectors().to_vec(),
        eigenvalues: decomp.eigenvalues().to_vec(),
        basis: basis.clone(),
    })
}

/// Partition of outcome indices {0..N} by eigenvalue equality.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeGrouping {
    groups: Vec<Vec<usize>>,
    eigenvalues: Vec<f64>,
    group_of: Vec<usize>,
}

impl OutcomeGrouping {
    /// One singleton group per outcome (non-degenerate measurement).
    pub fn singletons(n: usize) -> Self {
        Self {
            groups: (0..n).map(|i| vec![i]).collect(),
            eigenvalues: vec![f64::NAN; n],
            group_of: (0..n).collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Representative eigenvalue of each group (NaN for [`Self::singletons`]
    /// built without a decomposition).
    pub fn group_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Index of the group containing refined outcome `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn all_singletons(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }
}

/// Fuse outcomes whose eigenvalues differ by at most `deg_tol`, chaining
/// through the descending order (a gap below tolerance joins neighbours).
pub fn group_degenerate(decomp: &SpectralDecomposition, deg_tol: f64) -> OutcomeGrouping {
    let n = decomp.dimension();
    let o = decomp.eigenvalues();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut eigenvalues = Vec::new();
    for i in 0..n {
        match groups.last_mut() {
            Some(last) if (o[*last.last().unwrap()] - o[i]).abs() <= deg_tol => {
                last.push(i);
            }
            _ => {
                groups.push(vec![i]);
                eigenvalues.push(o[i]);
            }
        }
    }
    let mut group_of = vec![0; n];
    for (g, members) in groups.iter().enumerate() {
        for &m in members {
            group_of[m] = g;
        }
    }
    OutcomeGrouping {
        groups,
        eigenvalues,
        group_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, max_abs_diff, pauli_dot, scale};
    use crate::rng::RandomSource;
    use crate::state_space::random_mixed;
    use crate::su_basis::build_gell_mann;
    use crate::tol;
    use num_complex::Complex64;

    fn random_hermitian(n: usize, rng: &mut RandomSource) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.normal(), rng.normal()));
        (&g + g.adjoint()).map(|c| c * 0.5)
    }

    #[test]
    fn sigma_z_decomposition() {
        let o = linalg::pauli()[2].clone();
        let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        assert!((d.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues()[1] + 1.0).abs() < 1e-14);
        let p0 = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert!(max_abs_diff(&d.projectors()[0], &p0) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut o = linalg::pauli()[0].clone();
        o[(0, 1)] += Complex64::new(0.0, 0.5);
        assert!(matches!(
            spectral_decompose(&o, tol::STRUCTURAL),
            Err(EbrError::NotHermitian { .. })
        ));
    }

    #[test]
    fn spin_product_eigenvalues_doubly_degenerate() {
        // sigma.a (x) sigma.b has eigenvalues {+1, +1, -1, -1}.
        let a = pauli_dot(&[0.0, 0.0, 1.0]);
        let b = pauli_dot(&[1.0, 0.0, 0.0]);
        let o = a.kronecker(&b);
        let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        let ev = d.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 1.0).abs() < 1e-12);
        assert!((ev[2] + 1.0).abs() < 1e-12);
        assert!((ev[3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn projectors_are_orthogonal_resolution() {
        let mut rng = RandomSource::from_seed(21);
        for n in 2..=4 {
            let o = random_hermitian(n, &mut rng);
            let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
            // P_i P_j = delta_ij P_i
            for (i, pi) in d.projectors().iter().enumerate() {
                for (j, pj) in d.projectors().iter().enumerate() {
                    let prod = pi * pj;
                    let want = if i == j {
                        pi.clone()
                    } else {
                        CMatrix::zeros(n, n)
                    };
                    assert!(max_abs_diff(&prod, &want) < tol::GEOMETRY);
                }
            }
            // sum P_i = I
            let mut sum = CMatrix::zeros(n, n);
            for p in d.projectors() {
                sum += p;
            }
            assert!(max_abs_diff(&sum, &linalg::identity(n)) < tol::GEOMETRY);
            // reconstruction
            assert!(max_abs_diff(&d.reconstruct(), &o) < tol::GEOMETRY);
        }
    }

    #[test]
    fn qubit_simplex_vertices_are_antipodal() {
        let basis = build_gell_mann(2).unwrap();
        let o = pauli_dot(&[0.6, 0.0, 0.8]);
        let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        let sx = simplex_of(&d, &basis).unwrap();
        let sum = &sx.vertices()[0] + &sx.vertices()[1];
        assert!(sum.norm() < tol::GEOMETRY);
        // vertex of the +1 outcome is the measurement axis itself
        let expected = DVector::from_row_slice(&[0.6, 0.0, 0.8]);
        assert!((&sx.vertices()[0] - expected).norm() < 1e-10);
    }

    #[test]
    fn simplex_gram_matrix_by_dimension() {
        let mut rng = RandomSource::from_seed(22);
        for n in 2..=4 {
            let basis = build_gell_mann(n).unwrap();
            for _ in 0..10 {
                let o = random_hermitian(n, &mut rng);
                let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
                let sx = simplex_of(&d, &basis).unwrap();
                for (i, vi) in sx.vertices().iter().enumerate() {
                    for (j, vj) in sx.vertices().iter().enumerate() {
                        let want = if i == j { 1.0 } else { -1.0 / (n as f64 - 1.0) };
                        assert!(
                            (vi.dot(vj) - want).abs() < tol::GEOMETRY,
                            "N={n} gram ({i},{j}) = {}",
                            vi.dot(vj)
                        );
                    }
                }
                // vertices sum to zero
                let mut sum = DVector::zeros(basis.bloch_dim());
                for v in sx.vertices() {
                    sum += v;
                }
                assert!(sum.norm() < tol::GEOMETRY);
            }
        }
    }

    #[test]
    fn simplex_vertices_affinely_independent() {
        let mut rng = RandomSource::from_seed(23);
        for n in 2..=4 {
            let basis = build_gell_mann(n).unwrap();
            let o = random_hermitian(n, &mut rng);
            let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
            let sx = simplex_of(&d, &basis).unwrap();
            let last = &sx.vertices()[n - 1];
            let diffs: Vec<DVector<f64>> = (0..n - 1).map(|i| &sx.vertices()[i] - last).collect();
            let mut gram = nalgebra::DMatrix::zeros(n - 1, n - 1);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    gram[(i, j)] = diffs[i].dot(&diffs[j]);
                }
            }
            let det = gram.determinant();
            assert!(det.abs() > 1e-6, "N={n} gram det {det}");
        }
    }

    #[test]
    fn simplex_dimension_mismatch() {
        let basis = build_gell_mann(3).unwrap();
        let o = pauli_dot(&[0.0, 0.0, 1.0]);
        let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        assert!(matches!(
            simplex_of(&d, &basis),
            Err(EbrError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grouping_non_degenerate() {
        let o = pauli_dot(&[0.0, 0.0, 1.0]);
        let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        let g = group_degenerate(&d, 1e-9);
        assert_eq!(g.groups(), &[vec![0], vec![1]]);
        assert!(g.all_singletons());
    }

    #[test]
    fn grouping_doubly_degenerate() {
        let a = pauli_dot(&[0.0, 0.0, 1.0]);
        let b = pauli_dot(&[1.0, 0.0, 0.0]);
        let o = a.kronecker(&b);
        let d = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        let g = group_degenerate(&d, 1e-9);
        assert_eq!(g.groups(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(g.group_of(1), 0);
        assert_eq!(g.group_of(2), 1);
        assert!((g.group_eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((g.group_eigenvalues()[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn grouping_tolerance_rule() {
        // eigenvalues (1, 1 + 1e-14, 0) with tolerance 1e-9 fuse the close pair
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0 + 1e-14, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        let d = spectral_decompose(&m, tol::STRUCTURAL).unwrap();
        let g = group_degenerate(&d, 1e-9);
        assert_eq!(g.groups().len(), 2);
        assert_eq!(g.groups()[0].len(), 2);
        assert_eq!(g.groups()[1], vec![2]);
    }

    #[test]
    fn decomposition_is_deterministic() {
        let mut rng = RandomSource::from_seed(55);
        let o = random_hermitian(4, &mut rng);
        let a = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        let b = spectral_decompose(&o, tol::STRUCTURAL).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.eigenvectors(), b.eigenvectors());
    }

    #[test]
    fn projector_bloch_vectors_are_unit() {
        let mut rng = RandomSource::from_seed(60);
        let basis = build_gell_mann(4).unwrap();
        let dm = random_mixed(4, &mut rng);
        let d = spectral_decompose(dm.matrix(), tol::STRUCTURAL).unwrap();
        let sx = simplex_of(&d, &basis).unwrap();
        for v in sx.vertices() {
            assert!((v.norm() - 1.0).abs() < tol::GEOMETRY);
        }
        let m = scale(&linalg::identity(4), 0.25);
        let dd = DensityMatrix::new(m).unwrap();
        let r = to_bloch(&dd, &basis).unwrap();
        assert!(r.norm() < 1e-13);
    }
}
