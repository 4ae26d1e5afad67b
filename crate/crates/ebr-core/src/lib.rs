//! Extended Bloch representation (EBR) of finite-dimensional quantum mechanics.
//!
//! States of an N-level system are mapped to real vectors in the unit ball of
//! R^(N^2-1) through a basis of SU(N) generators. On top of that map the crate
//! implements the hidden-measurement mechanics: a deterministic orthogonal fall
//! of the state point onto the measurement simplex, followed by a weighted
//! symmetry breaking whose region measures reproduce the Born rule. Bipartite
//! states get a direct-sum split into subsystem and correlation parts, and a
//! rigid-rod model reproduces singlet correlations up to the 2*sqrt(2) CHSH
//! violation.

pub mod bell_rod;
pub mod composite;
pub mod error;
pub mod hidden_measurement;
pub mod linalg;
pub mod observables;
pub mod rng;
pub mod state_space;
pub mod su_basis;
pub mod tol;

pub use error::{EbrError, Result};
pub use rng::RandomSource;
