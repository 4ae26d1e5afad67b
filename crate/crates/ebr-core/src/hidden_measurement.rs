//! The two-stage hidden-measurement process.
//!
//! Stage 1 is deterministic: the state point falls along the path orthogonal
//! to the measurement simplex onto the on-simplex point r_par, whose unique
//! convex expansion in the vertices carries exactly the outcome
//! probabilities. Stage 2 breaks the symmetry: a uniformly distributed point
//! of the simplex disintegrates, and the region A_i it belongs to decides
//! the outcome; the region measures are proportional to the barycentric
//! weights, so uniform breaking reproduces the Born rule. Degenerate
//! outcomes fuse regions and finish with the projection postulate.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{EbrError, Result};
use crate::linalg::{scale, CMatrix};
use crate::observables::{MeasurementSimplex, OutcomeGrouping};
use crate::rng::{self, RandomSource};
use crate::state_space::{from_bloch, BlochVector, DensityMatrix};
use crate::tol;

/// The fully fallen state: the on-simplex point, its barycentric weights,
/// and the orthogonal component that was lost in the fall.
#[derive(Debug, Clone)]
pub struct OnSimplexState {
    r_par: BlochVector,
    barycentric: DVector<f64>,
    r_perp: BlochVector,
}

impl OnSimplexState {
    /// The on-simplex point r_par = sum_i w_i n_i.
    pub fn r_par(&self) -> &BlochVector {
        &self.r_par
    }

    /// Convex weights w_i = Tr(D P_i); the outcome probabilities.
    pub fn barycentric(&self) -> &DVector<f64> {
        &self.barycentric
    }

    /// r - r_par, orthogonal to the simplex.
    pub fn r_perp(&self) -> &BlochVector {
        &self.r_perp
    }

    pub fn dimension(&self) -> usize {
        self.barycentric.len()
    }
}

/// A uniformly sampled disintegration point of the simplex membrane.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakingPoint {
    barycentric: DVector<f64>,
}

impl BreakingPoint {
    pub fn new(barycentric: DVector<f64>) -> Result<Self> {
        let sum: f64 = barycentric.iter().sum();
        if barycentric.iter().any(|&x| x < -1e-12) || (sum - 1.0).abs() > tol::GEOMETRY {
            return Err(EbrError::InvalidBreakingPoint(sum));
        }
        Ok(Self { barycentric })
    }

    pub fn barycentric(&self) -> &DVector<f64> {
        &self.barycentric
    }
}

/// What a single simulated measurement produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Non-degenerate outcome: the collapse reached vertex `index`.
    Single { index: usize },
    /// Degenerate outcome: the collapse reached the sub-simplex spanned by
    /// `members`; `index` is the group's position in the grouping.
    Group { index: usize, members: Vec<usize> },
}

impl Outcome {
    /// The reported outcome index (vertex index or group index).
    pub fn index(&self) -> usize {
        match self {
            Outcome::Single { index } => *index,
            Outcome::Group { index, .. } => *index,
        }
    }
}

/// One simulated measurement: the sampled breaking point, the selected
/// outcome, the post-measurement state, and the probability it carried.
#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub lambda: BreakingPoint,
    pub outcome: Outcome,
    pub post_state: DensityMatrix,
    pub probability_used: f64,
    /// For degenerate outcomes, the intermediate on-sub-simplex point
    /// (barycentric w_k / p_M on members, 0 elsewhere).
    pub sub_simplex: Option<DVector<f64>>,
}

/// Stage 1: orthogonal fall onto the simplex.
///
/// The barycentric weights come out as w_i = (1 + (N-1) r . n_i)/N, which
/// equals Tr(D(r) P_i); the fall does not change any outcome probability.
/// Errors if `r` is not a state for the simplex's basis.
pub fn project_onto_simplex(r: &BlochVector, sx: &MeasurementSimplex) -> Result<OnSimplexState> {
    let n = sx.dimension();
    if r.dimension() != n {
        return Err(EbrError::DimensionMismatch {
            left: r.dimension(),
            right: n,
            context: "project_onto_simplex: state vs simplex",
        });
    }
    let m = from_bloch(r, sx.basis())?;
    let min_eig = m
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

    let nf = n as f64;
    let barycentric = DVector::from_iterator(
        n,
        sx.vertices()
            .iter()
            .map(|v| (1.0 + (nf - 1.0) * r.components().dot(v)) / nf),
    );
    let mut r_par = DVector::zeros(r.components().len());
    for (w, v) in barycentric.iter().zip(sx.vertices()) {
        r_par += v * *w;
    }
    let r_perp = r.components() - &r_par;
    Ok(OnSimplexState {
        r_par: BlochVector::new(n, r_par)?,
        barycentric,
        r_perp: BlochVector::new(n, r_perp)?,
    })
}

/// The Born probabilities of `r` under the measurement `sx`: the barycentric
/// weights of the fallen point, equal to the relative region measures
/// mu(A_i)/mu(simplex).
pub fn born_probabilities(r: &BlochVector, sx: &MeasurementSimplex) -> Result<DVector<f64>> {
    Ok(project_onto_simplex(r, sx)?.barycentric)
}

/// Stage-1 path r_tau = (1 - tau) r + tau r_par.
pub fn trajectory_stage1(
    r: &BlochVector,
    sx: &MeasurementSimplex,
    tau: f64,
) -> Result<BlochVector> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(EbrError::TauOutOfRange(tau));
    }
    let on = project_onto_simplex(r, sx)?;
    let point = r.components() * (1.0 - tau) + on.r_par.components() * tau;
    BlochVector::new(sx.dimension(), point)
}

/// Stage-2 path r_tau = (1 - tau) r_par + tau n_i, ending on vertex `i`.
pub fn trajectory_stage2(
    on: &OnSimplexState,
    sx: &MeasurementSimplex,
    i: usize,
    tau: f64,
) -> Result<BlochVector> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(EbrError::TauOutOfRange(tau));
    }
    let n = sx.dimension();
    if i >= n {
        return Err(EbrError::OutcomeIndexOutOfRange { index: i, count: n });
    }
    let point = on.r_par.components() * (1.0 - tau) + &sx.vertices()[i] * tau;
    BlochVector::new(n, point)
}

/// Fill `out` with a uniform sample from the standard simplex
/// (normalized unit exponentials, i.e. a flat Dirichlet).
pub(crate) fn sample_simplex_uniform_into(rng: &mut RandomSource, out: &mut [f64]) {
    let mut sum = 0.0;
    for x in out.iter_mut() {
        let e = rng.exponential();
        *x = e;
        sum += e;
    }
    for x in out.iter_mut() {
        *x /= sum;
    }
}

/// Uniformly sample a breaking point of the simplex membrane.
pub fn sample_lambda(sx: &MeasurementSimplex, rng: &mut RandomSource) -> BreakingPoint {
    let mut bary = vec![0.0; sx.dimension()];
    sample_simplex_uniform_into(rng, &mut bary);
    BreakingPoint {
        barycentric: DVector::from_vec(bary),
    }
}

/// Locate the breaking point in the fan partition: A_i is the convex hull of
/// the fallen point and the vertices other than n_i, so lambda lies in A_i
/// exactly when lambda_i / w_i is the smallest ratio. Weights w_j = 0 give
/// measure-zero regions and are never selected; exact ties resolve to the
/// lowest index.
pub(crate) fn region_index(lambda: &[f64], weights: &[f64]) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for (j, (&l, &w)) in lambda.iter().zip(weights).enumerate() {
        if w > 0.0 {
            let ratio = l / w;
            match best {
                Some((r, _)) if ratio >= r => {}
                _ => best = Some((ratio, j)),
            }
        }
    }
    best.map(|(_, j)| j).unwrap_or(0)
}

/// Outcome region of a breaking point given the fallen state.
pub fn region_of(lambda: &BreakingPoint, on: &OnSimplexState) -> usize {
    region_index(lambda.barycentric.as_slice(), on.barycentric.as_slice())
}

/// One full non-degenerate measurement: fall, break, collapse to a vertex.
pub fn run_measurement(
    r: &BlochVector,
    sx: &MeasurementSimplex,
    rng: &mut RandomSource,
) -> Result<OutcomeRecord> {
    let on = project_onto_simplex(r, sx)?;
    let lambda = sample_lambda(sx, rng);
    let index = region_of(&lambda, &on);
    Ok(OutcomeRecord {
        lambda,
        outcome: Outcome::Single { index },
        post_state: DensityMatrix::new_unchecked(sx.projectors()[index].clone()),
        probability_used: on.barycentric[index],
        sub_simplex: None,
    })
}

/// One full measurement with outcome fusion: the refined region decides the
/// group, the collapse stops on the group's sub-simplex, and the projection
/// postulate (Lueders rule) gives the final state P_M D P_M / Tr(P_M D).
pub fn run_degenerate(
    r: &BlochVector,
    sx: &MeasurementSimplex,
    grouping: &OutcomeGrouping,
    rng: &mut RandomSource,
) -> Result<OutcomeRecord> {
    let on = project_onto_simplex(r, sx)?;
    let lambda = sample_lambda(sx, rng);
    let refined = region_of(&lambda, &on);
    let group = grouping.group_of(refined);
    let members = grouping.groups()[group].clone();

    let probability: f64 = members.iter().map(|&k| on.barycentric[k]).sum();

    let n = sx.dimension();
    let mut pm = CMatrix::zeros(n, n);
    for &k in &members {
        pm += &sx.projectors()[k];
    }
    let d = from_bloch(r, sx.basis())?;
    let numerator = &pm * &d * &pm;
    let trace = numerator.trace().re;
    if !trace.is_finite() || trace <= 0.0 {
        return Err(EbrError::ZeroProbabilityGroup(group));
    }
    let post_state = DensityMatrix::new_unchecked(scale(&numerator, 1.0 / trace));

    let sub_simplex = DVector::from_fn(n, |k, _| {
        if members.contains(&k) {
            on.barycentric[k] / probability
        } else {
            0.0
        }
    });

    Ok(OutcomeRecord {
        lambda,
        outcome: Outcome::Group {
            index: group,
            members,
        },
        post_state,
        probability_used: probability,
        sub_simplex: Some(sub_simplex),
    })
}

/// Aggregate statistics of one reported outcome group.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutcomeStat {
    /// Group position in the grouping (outcome index for singletons).
    pub index: usize,
    /// Refined outcome indices fused into this group.
    pub members: Vec<usize>,
    /// Representative eigenvalue (of the first member).
    pub eigenvalue: f64,
    pub count: u64,
    pub frequency: f64,
    /// Analytic Born probability.
    pub probability: f64,
    /// (frequency - probability) / sqrt(p (1 - p) / trials).
    pub z_score: f64,
}

/// Outcome frequencies of repeated independent measurements against the
/// analytic Born probabilities.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrequencyReport {
    pub trials: u64,
    pub seed: u64,
    pub outcomes: Vec<OutcomeStat>,
    pub chi_square: f64,
    /// Upper-tail chi-squared p-value with (#groups of positive
    /// probability - 1) degrees of freedom.
    pub p_value: f64,
}

/// Run `trials` independent measurements of the state `r`, fusing outcomes
/// per `grouping`, and report counts, frequencies, z-scores and a chi-square
/// statistic. The run is split into fixed-size chunks with one child random
/// stream each, so the result is byte-identical for any `threads >= 1`.
pub fn monte_carlo_report(
    r: &BlochVector,
    sx: &MeasurementSimplex,
    grouping: &OutcomeGrouping,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<FrequencyReport> {
    if trials == 0 {
        return Err(EbrError::ZeroTrials);
    }
    let on = project_onto_simplex(r, sx)?;
    let refined = refined_counts(on.barycentric.as_slice(), trials, seed, threads);

    let mut outcomes = Vec::with_capacity(grouping.len());
    let mut chi_square = 0.0_f64;
    let mut df: i64 = -1;
    for (g, members) in grouping.groups().iter().enumerate() {
        let count: u64 = members.iter().map(|&k| refined[k]).sum();
        let probability: f64 = members.iter().map(|&k| on.barycentric[k]).sum();
        let frequency = count as f64 / trials as f64;
        let se = (probability * (1.0 - probability) / trials as f64).sqrt();
        let z_score = if frequency == probability {
            0.0
        } else if se == 0.0 {
            f64::INFINITY * (frequency - probability).signum()
        } else {
            (frequency - probability) / se
        };
        if probability > 0.0 {
            let expected = trials as f64 * probability;
            let diff = count as f64 - expected;
            chi_square += diff * diff / expected;
            df += 1;
        } else if count > 0 {
            chi_square = f64::INFINITY;
        }
        outcomes.push(OutcomeStat {
            index: g,
            members: members.clone(),
            eigenvalue: sx.eigenvalues()[members[0]],
            count,
            frequency,
            probability,
            z_score,
        });
    }

    let p_value = chi_square_p_value(chi_square, df.max(0) as u64);
    Ok(FrequencyReport {
        trials,
        seed,
        outcomes,
        chi_square,
        p_value,
    })
}

/// Per-refined-outcome counts over chunked child streams.
fn refined_counts(weights: &[f64], trials: u64, seed: u64, threads: usize) -> Vec<u64> {
    let n = weights.len();
    rng::run_chunked(
        trials,
        seed,
        threads,
        |rng, len| {
            let mut counts = vec![0u64; n];
            let mut lambda = vec![0.0; n];
            for _ in 0..len {
                sample_simplex_uniform_into(rng, &mut lambda);
                counts[region_index(&lambda, weights)] += 1;
            }
            counts
        },
        || vec![0u64; n],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

fn chi_square_p_value(chi_square: f64, df: u64) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if !chi_square.is_finite() {
        return 0.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive dof");
    1.0 - dist.cdf(chi_square)
}
