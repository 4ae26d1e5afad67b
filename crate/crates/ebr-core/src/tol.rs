//! Shared numerical tolerances.

/// Structural checks on constructed matrices: Hermiticity, tracelessness,
/// trace orthonormality, unit trace. Double precision on matrices of
/// dimension <= 16 stays far below this.
pub const STRUCTURAL: f64 = 1e-12;

/// Slack on the minimum eigenvalue when testing positive semi-definiteness.
/// Absorbs round-trip noise without admitting genuinely negative operators.
pub const PSD: f64 = 1e-10;

/// Geometric identities that accumulate a few eigensolver round-offs:
/// simplex Gram relations, barycentric sums, projector resolutions.
pub const GEOMETRY: f64 = 1e-10;

/// Default spread (relative to the largest |eigenvalue|) below which two
/// eigenvalues are fused into one degenerate outcome.
pub const DEGENERACY_DEFAULT: f64 = 1e-9;
