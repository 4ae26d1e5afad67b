//! Rigid-rod model of sequential spin measurements on a singlet pair.
//!
//! Both point particles start at the center of their Bloch spheres. The
//! first measurement runs the ordinary hidden-measurement process on the
//! centered particle, so each outcome comes up with probability 1/2. A rigid
//! rod on a pivot then forces the partner to the antipode of the outcome
//! vertex, the rod is disabled, and the partner is measured along its own
//! axis as a pure state. The resulting correlation E = -nA.nB reproduces the
//! singlet Born statistics for either measurement order, up to the 2 sqrt 2
//! CHSH violation.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{EbrError, Result};
use crate::hidden_measurement::{
    project_onto_simplex, region_index, sample_simplex_uniform_into, OnSimplexState,
};
use crate::linalg::pauli_dot;
use crate::observables::{simplex_of, spectral_decompose, MeasurementSimplex};
use crate::rng::{self, RandomSource};
use crate::state_space::BlochVector;
use crate::su_basis::build_gell_mann;
use crate::tol;

/// Which particle is measured first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementOrder {
    AFirst,
    BFirst,
}

/// Stern-Gerlach orientations for the two sequential measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodConfig {
    n_a: [f64; 3],
    n_b: [f64; 3],
    order: MeasurementOrder,
}

impl RodConfig {
    /// Both axes must be unit 3-vectors.
    pub fn new(n_a: [f64; 3], n_b: [f64; 3], order: MeasurementOrder) -> Result<Self> {
        for n in [&n_a, &n_b] {
            let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if (norm - 1.0).abs() > tol::STRUCTURAL {
                return Err(EbrError::NotAUnitVector(norm));
            }
        }
        Ok(Self { n_a, n_b, order })
    }

    pub fn n_a(&self) -> [f64; 3] {
        self.n_a
    }

    pub fn n_b(&self) -> [f64; 3] {
        self.n_b
    }

    pub fn order(&self) -> MeasurementOrder {
        self.order
    }

    pub fn with_order(&self, order: MeasurementOrder) -> Self {
        Self { order, ..*self }
    }

    /// cos of the angle between the two axes.
    pub fn axis_dot(&self) -> f64 {
        self.n_a[0] * self.n_b[0] + self.n_a[1] * self.n_b[1] + self.n_a[2] * self.n_b[2]
    }
}

/// Unit vector in the x-z plane at `theta` degrees from +z; the CLI's
/// coplanar angle convention.
pub fn coplanar_axis(theta_degrees: f64) -> [f64; 3] {
    let t = theta_degrees.to_radians();
    [t.sin(), 0.0, t.cos()]
}

/// Outcomes of one trial, in {-1, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub s_a: i8,
    pub s_b: i8,
}

/// Sample mean of s_a * s_b with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub e_hat: f64,
    pub trials: u64,
    pub std_error: f64,
}

/// Precomputed machinery for one axis configuration: the first particle's
/// simplex with the centered state projected onto it, and the partner's
/// simplex with both possible post-rod states already fallen.
#[derive(Debug, Clone)]
pub struct RodSimulator {
    order: MeasurementOrder,
    first_sx: MeasurementSimplex,
    on_center: OnSimplexState,
    partner: [BlochVector; 2],
    on_partner: [OnSimplexState; 2],
}

impl RodSimulator {
    pub fn new(cfg: &RodConfig) -> Result<Self> {
        let basis = build_gell_mann(2)?;
        let (first_axis, second_axis) = match cfg.order {
            MeasurementOrder::AFirst => (cfg.n_a, cfg.n_b),
            MeasurementOrder::BFirst => (cfg.n_b, cfg.n_a),
        };
        let first_sx = simplex_of(
            &spectral_decompose(&pauli_dot(&first_axis), tol::STRUCTURAL)?,
            &basis,
        )?;
        let second_sx = simplex_of(
            &spectral_decompose(&pauli_dot(&second_axis), tol::STRUCTURAL)?,
            &basis,
        )?;
        let on_center = project_onto_simplex(&BlochVector::zero(2), &first_sx)?;

        // rod rule: the partner jumps to the antipode of the outcome vertex
        let partner_of =
            |i: usize| -> Result<BlochVector> { BlochVector::new(2, -&first_sx.vertices()[i]) };
        let partner = [partner_of(0)?, partner_of(1)?];
        let on_partner = [
            project_onto_simplex(&partner[0], &second_sx)?,
            project_onto_simplex(&partner[1], &second_sx)?,
        ];
        Ok(Self {
            order: cfg.order,
            first_sx,
            on_center,
            partner,
            on_partner,
        })
    }

    /// The state the rod forces the partner into after first outcome `i`.
    pub fn partner_state(&self, i: usize) -> &BlochVector {
        &self.partner[i]
    }

    /// Vertex of the first measurement's outcome `i`.
    pub fn first_vertex(&self, i: usize) -> &DVector<f64> {
        &self.first_sx.vertices()[i]
    }

    /// Run one trial; outcome index 0 is the +1 eigenvalue.
    pub fn trial(&self, rng: &mut RandomSource) -> TrialOutcome {
        let mut lambda = [0.0; 2];
        sample_simplex_uniform_into(rng, &mut lambda);
        let first = region_index(&lambda, self.on_center.barycentric().as_slice());
        sample_simplex_uniform_into(rng, &mut lambda);
        let second = region_index(&lambda, self.on_partner[first].barycentric().as_slice());

        let sign = |i: usize| if i == 0 { 1i8 } else { -1i8 };
        match self.order {
            MeasurementOrder::AFirst => TrialOutcome {
                s_a: sign(first),
                s_b: sign(second),
            },
            MeasurementOrder::BFirst => TrialOutcome {
                s_a: sign(second),
                s_b: sign(first),
            },
        }
    }
}

/// Run a single rod trial from scratch.
pub fn run_rod_trial(cfg: &RodConfig, rng: &mut RandomSource) -> Result<TrialOutcome> {
    Ok(RodSimulator::new(cfg)?.trial(rng))
}

/// Joint outcome counts in cell order (+,+), (+,-), (-,+), (-,-).
fn joint_counts(sim: &RodSimulator, trials: u64, seed: u64, threads: usize) -> [u64; 4] {
    rng::run_chunked(
        trials,
        seed,
        threads,
        |rng, len| {
            let mut counts = [0u64; 4];
            for _ in 0..len {
                let t = sim.trial(rng);
                let idx = ((1 - t.s_a) + (1 - t.s_b) / 2) as usize;
                counts[idx] += 1;
            }
            counts
        },
        || [0u64; 4],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

/// Estimate E = <s_a s_b> over `trials` independent rod trials.
pub fn correlation(
    cfg: &RodConfig,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<CorrelationEstimate> {
    if trials == 0 {
        return Err(EbrError::ZeroTrials);
    }
    let sim = RodSimulator::new(cfg)?;
    let c = joint_counts(&sim, trials, seed, threads);
    Ok(estimate_from_counts(&c, trials))
}

fn estimate_from_counts(c: &[u64; 4], trials: u64) -> CorrelationEstimate {
    let t = trials as f64;
    let e_hat = (c[0] as f64 + c[3] as f64 - c[1] as f64 - c[2] as f64) / t;
    let std_error = ((1.0 - e_hat * e_hat) / t).sqrt();
    CorrelationEstimate {
        e_hat,
        trials,
        std_error,
    }
}

/// One cell of the empirical joint distribution next to its quantum value
/// P(s_a, s_b) = (1 - s_a s_b nA.nB)/4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCell {
    pub s_a: i8,
    pub s_b: i8,
    pub count: u64,
    pub frequency: f64,
    pub probability: f64,
    pub z_score: f64,
}

/// Empirical 2x2 joint table of one axis configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub order: MeasurementOrder,
    pub trials: u64,
    pub seed: u64,
    pub cells: Vec<JointCell>,
    pub marginal_a_plus: f64,
    pub marginal_b_plus: f64,
    pub correlation: CorrelationEstimate,
}

/// Empirical joint distribution of (s_a, s_b) against the quantum oracle.
pub fn joint_distribution(
    cfg: &RodConfig,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<JointDistribution> {
    if trials == 0 {
        return Err(EbrError::ZeroTrials);
    }
    let sim = RodSimulator::new(cfg)?;
    let counts = joint_counts(&sim, trials, seed, threads);
    let dot = cfg.axis_dot();
    let t = trials as f64;

    let signs = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
    let cells: Vec<JointCell> = signs
        .iter()
        .zip(&counts)
        .map(|(&(s_a, s_b), &count)| {
            let probability = 0.25 * (1.0 - (s_a as f64) * (s_b as f64) * dot);
            let frequency = count as f64 / t;
            let se = (probability * (1.0 - probability) / t).sqrt();
            let z_score = if frequency == probability {
                0.0
            } else if se == 0.0 {
                f64::INFINITY * (frequency - probability).signum()
            } else {
                (frequency - probability) / se
            };
            JointCell {
                s_a,
                s_b,
                count,
                frequency,
                probability,
                z_score,
            }
        })
        .collect();

    Ok(JointDistribution {
        order: cfg.order,
        trials,
        seed,
        marginal_a_plus: (counts[0] + counts[1]) as f64 / t,
        marginal_b_plus: (counts[0] + counts[2]) as f64 / t,
        correlation: estimate_from_counts(&counts, trials),
        cells,
    })
}

/// The four correlations and the CHSH combination
/// S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub e_ab: CorrelationEstimate,
    pub e_ab_prime: CorrelationEstimate,
    pub e_a_prime_b: CorrelationEstimate,
    pub e_a_prime_b_prime: CorrelationEstimate,
    pub s_hat: f64,
    /// Root-sum-square of the four standard errors.
    pub std_error: f64,
    pub trials_per_correlation: u64,
    pub seed: u64,
}

/// Estimate the CHSH quantity from four independent correlation runs (child
/// streams of `seed`), all with measurement order A-first.
pub fn chsh(
    a: [f64; 3],
    a_prime: [f64; 3],
    b: [f64; 3],
    b_prime: [f64; 3],
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<ChshEstimate> {
    let parent = RandomSource::from_seed(seed);
    let run = |n1: [f64; 3], n2: [f64; 3], k: u64| -> Result<CorrelationEstimate> {
        let cfg = RodConfig::new(n1, n2, MeasurementOrder::AFirst)?;
        correlation(&cfg, trials, parent.child(k).seed(), threads)
    };
    let e_ab = run(a, b, 0)?;
    let e_ab_prime = run(a, b_prime, 1)?;
    let e_a_prime_b = run(a_prime, b, 2)?;
    let e_a_prime_b_prime = run(a_prime, b_prime, 3)?;
    let s_hat = (e_ab.e_hat - e_ab_prime.e_hat + e_a_prime_b.e_hat + e_a_prime_b_prime.e_hat).abs();
    let std_error = (e_ab.std_error.powi(2)
        + e_ab_prime.std_error.powi(2)
        + e_a_prime_b.std_error.powi(2)
        + e_a_prime_b_prime.std_error.powi(2))
    .sqrt();
    Ok(ChshEstimate {
        e_ab,
        e_ab_prime,
        e_a_prime_b,
        e_a_prime_b_prime,
        s_hat,
        std_error,
        trials_per_correlation: trials,
        seed,
    })
}

/// Coplanar angles (degrees) maximizing the CHSH combination for the rod
/// model: S converges to 2 sqrt 2.
pub const CHSH_OPTIMAL_ANGLES: [f64; 4] = [0.0, 90.0, 45.0, 135.0];

/// Both measurement orders run under independent seeds, each joint table
/// standing against the quantum oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderInvarianceReport {
    pub a_first: JointDistribution,
    pub b_first: JointDistribution,
    pub max_abs_z: f64,
    /// All eight cells within 4 sigma of the oracle.
    pub pass: bool,
}

/// Statistical equivalence of the two measurement orders: both joint tables
/// must match the quantum prediction (not each other trialwise).
pub fn order_invariance_check(
    cfg: &RodConfig,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<OrderInvarianceReport> {
    let parent = RandomSource::from_seed(seed);
    let a_first = joint_distribution(
        &cfg.with_order(MeasurementOrder::AFirst),
        trials,
        parent.child(0).seed(),
        threads,
    )?;
    let b_first = joint_distribution(
        &cfg.with_order(MeasurementOrder::BFirst),
        trials,
        parent.child(1).seed(),
        threads,
    )?;
    let max_abs_z = a_first
        .cells
        .iter()
        .chain(&b_first.cells)
        .map(|c| c.z_score.abs())
        .fold(0.0, f64::max);
    Ok(OrderInvarianceReport {
        pass: max_abs_z <= 4.0,
        a_first,
        b_first,
        max_abs_z,
    })
}
