//! Deterministic pseudo-random operators for unit tests.

use num_complex::Complex64 as C64;

use crate::operator::{Operator, Space};

/// splitmix64 stream mapped to [-1, 1).
pub(crate) fn rng_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed;
    move || {
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^= z >> 31;
        (z as f64 / u64::MAX as f64) * 2.0 - 1.0
    }
}

pub(crate) fn random_operator(space: Space, seed: u64) -> Operator {
    let mut r = rng_stream(seed);
    let d = space.dim();
    let mut op = Operator::zeros(space);
    for i in 0..d {
        for j in 0..d {
            op.set(i, j, C64::new(r(), r()));
        }
    }
    op
}

/// The fig2 preset parameters: Ω₁ = Ω₂ = 8.5ν, γ = 10ν (γ₁ = γ₂),
/// δ = 35ν, φ₁ = 0, φ₂ = π, η₁ = η₂ = 0.01.
pub(crate) fn fig2_params(n_max: usize) -> crate::model::ModelParams {
    crate::model::ModelParams {
        omega1: 8.5,
        omega2: 8.5,
        delta: 35.0,
        gamma1: 5.0,
        gamma2: 5.0,
        eta1: 0.01,
        eta2: 0.01,
        n_max,
        ..crate::model::ModelParams::default()
    }
}

/// The fig4 preset parameters: like fig2 but δ = 15ν, η₁ = η₂ = 0.05.
pub(crate) fn fig4_params(n_max: usize) -> crate::model::ModelParams {
    crate::model::ModelParams {
        delta: 15.0,
        eta1: 0.05,
        eta2: 0.05,
        ..fig2_params(n_max)
    }
}
