//! Emission spectra of a harmonically trapped three-level atom in a
//! Λ configuration, driven at two-photon resonance by a pair of lasers
//! that cool the center-of-mass motion.
//!
//! At two-photon resonance the electronic steady state is a dark
//! superposition of the two ground states, so photons are scattered only
//! through the mechanical coupling between light and motion. This crate
//! evaluates the resulting spectrum to second order in the Lamb-Dicke
//! expansion and checks every analytic piece against a brute-force
//! master-equation solver.
//!
//! Everything is expressed in trap units: frequencies in units of the trap
//! frequency ν, lengths in units of the oscillator ground-state size x₀,
//! and ħ = 1. Spectra are functions of (ω − ω_L1)/ν.
//!
//! Layout:
//! * [`operator`], [`superop`], [`spectral`] — dense operator and
//!   superoperator algebra with biorthogonal spectral decompositions.
//! * [`model`] — the Λ-system: parameters, dark state, Lamb-Dicke
//!   expansion of the Liouvillian.
//! * [`composite`] — zero-order projectors/resolvents on the
//!   internal ⊗ motional space, exploiting the tensor structure.
//! * [`perturbation`] — degenerate perturbation theory of the Liouvillian
//!   and the effective phonon dynamics (cooling/heating rates).
//! * [`spectrum`] — assembly of the second-order spectrum: sidebands,
//!   Mollow-type inelastic part, elastic-peak weight.
//! * [`oracle`] — nonperturbative reference: full master equation with
//!   exact recoil exponentials, steady state, and resolvent spectra.

pub mod composite;
pub mod error;
#[cfg(test)]
pub(crate) mod testutil;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod perturbation;
pub mod spectral;
pub mod spectrum;
pub mod superop;
pub mod tolerances;

pub use error::{Error, Result};
pub use model::{
    build_expansion, dark_state, detuning_sign_audit, thermal_mu, AuditReport, DetuningSign,
    EmissionPattern, ExpansionOperators, ModelParams,
};
pub use operator::{fock_operators, Operator, Space};
pub use oracle::{
    build_full_liouvillian, gauss_legendre, oracle_spectrum, steady_state, top_level_population,
    FullLiouvillian, OracleSpectrum,
};
pub use perturbation::{
    correct_eigenspace, phonon_coefficients, phonon_effective_eigensystem,
    phonon_effective_eigensystem_unchecked, s_closed_form,
    PerturbativeState, PhononCoefficients, PhononMode,
};
pub use spectral::{reduced_resolvent, spectral_decompose, EigenGroup, SpectralDecomposition};
pub use spectrum::{
    compute_spectrum, elastic_peak_weight, external_trace_identities, f_closed_form,
    f_trace_formula, g_weights, sample_spectrum, sideband_closed_form, vanishing_order_checks,
    ExternalTraces, LineShapeTerm, SidebandForm, SpectralComponent, SpectrumResult,
    SpectrumSummary, VanishingReport,
};
pub use superop::{commutator_superop, lindblad_superop, SuperOp};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Pin the dense linear-algebra kernels to sequential execution.
///
/// Eigendecompositions and LU solves are then bitwise reproducible across
/// runs; coarse-grained parallelism (per-frequency resolvent solves) is
/// unaffected.
pub fn set_sequential_dense_kernels() {
    faer::set_global_parallelism(faer::Par::Seq);
}
