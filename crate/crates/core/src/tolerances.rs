//! Centralized numerical tolerances.
//!
//! Every threshold used by runtime checks and by the test suites is defined
//! here, with the reasoning behind it. Tests must not invent ad-hoc numbers.

/// Exact algebraic identities evaluated in f64 (trace of a commutator,
/// Lindblad trace annihilation, Hermiticity of constructed operators).
/// Allows ~4 digits of accumulated rounding on top of machine epsilon.
pub const EXACT_IDENTITY: f64 = 1e-12;

/// Biorthonormality Tr{ρ̌' ρ} = δ of a spectral decomposition. The left
/// eigenelements come from a matrix inverse, so the error is bounded by the
/// conditioning of the eigenvector matrix rather than by machine epsilon.
pub const BIORTHONORMALITY: f64 = 1e-10;

/// Reconstruction of a random operator from a complete biorthogonal set,
/// and residuals of resolvent identities. One more digit of slack than
/// [`BIORTHONORMALITY`] since two decompositions enter.
pub const COMPLETENESS: f64 = 1e-9;

/// Default eigenvalue grouping tolerance, as a fraction of the spectral
/// radius. Separates exact degeneracies (the iℓν ladder of the external
/// Liouvillian) from eigensolver noise.
pub const GROUPING_REL: f64 = 1e-8;

/// Agreement between two independent algebraic routes to the same quantity
/// (closed forms vs resolvent evaluations of s(ν) and f(λ_E)).
pub const DUAL_ROUTE_REL: f64 = 1e-9;

/// Detailed-balance identity ⟨n⟩/(1+⟨n⟩) = A₊/A₋. Pure arithmetic
/// rearrangement of the definitions, so essentially machine precision.
pub const DETAILED_BALANCE: f64 = 1e-12;

/// Closed-form λ₂(N, ℓ) versus numerical diagonalization of the effective
/// phonon generator, after truncation convergence.
pub const PHONON_EIGENVALUE: f64 = 1e-8;

/// Trace terms that vanish identically at second order (the vanishing-order
/// property suite), relative to the sideband peak height.
pub const VANISHING_REL: f64 = 1e-10;

/// Pointwise agreement of the sideband spectrum assembled from spectral
/// weights against its closed Lorentzian form.
pub const SIDEBAND_FORM_REL: f64 = 1e-8;

/// Equality of the two sideband peak heights, relative to the height s₀.
pub const EQUAL_HEIGHTS_REL: f64 = 1e-8;

/// Floor for steady-state eigenvalues: positivity up to eigensolver noise.
pub const POSITIVITY_FLOOR: f64 = -1e-10;

/// Trace preservation of the full (quadrature-discretized) Liouvillian on
/// random operators. Looser than [`EXACT_IDENTITY`] because the recoil
/// integral is assembled from many quadrature terms.
pub const ORACLE_TRACE: f64 = 1e-10;
