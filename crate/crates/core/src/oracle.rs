//! Brute-force nonperturbative reference.
//!
//! Builds the full master equation on the truncated composite space with
//! exact recoil exponentials exp(±iη_j cosφ_j x̂), the spontaneous-emission
//! integral over emission angles replaced by Gauss-Legendre quadrature in
//! cosθ, and evaluates the emission spectrum by per-frequency resolvent
//! solves with the elastic pole deflated. No Lamb-Dicke expansion is made
//! anywhere in this module, so it checks the perturbative results from the
//! outside.

use faer::linalg::solvers::{PartialPivLu, Solve, SolveLstsq};
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::operator::{Operator, Space, EXC, G1, G2};
use crate::superop::{commutator_superop, SuperOp};
use crate::tolerances;

const I: C64 = C64::new(0.0, 1.0);

/// Gauss-Legendre nodes and weights on [−1, 1] (Newton iteration on the
/// Legendre recurrence; exact for polynomials up to degree 2n − 1).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for m in 2..=n {
                let m = m as f64;
                let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let dpn = if n == 1 {
                1.0
            } else {
                (n as f64) * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for m in 2..=n {
            let m = m as f64;
            let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        let dpn = if n == 1 {
            1.0
        } else {
            (n as f64) * (x * p1 - p0) / (x * x - 1.0)
        };
        let w = 2.0 / ((1.0 - x * x) * dpn * dpn);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// exp(i·c·x̂) on the truncated Fock space, through the eigendecomposition
/// of the (real symmetric) position operator.
fn phase_exponential(x_op: &Operator, c: f64) -> Result<Operator> {
    let evd = x_op
        .mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("position operator eigensolve: {e:?}")))?;
    let q = evd.U();
    let s = evd.S();
    let d = x_op.dim();
    let mut out = Mat::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                let phase = (I * C64::new(c, 0.0) * s[k]).exp();
                acc += q[(i, k)] * phase * q[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    Operator::new(x_op.space(), out)
}

/// The full Liouvillian with its quadrature rule.
#[derive(Debug, Clone)]
pub struct FullLiouvillian {
    pub l: SuperOp,
    /// (cosθ node, Gauss-Legendre weight) pairs of the recoil integral.
    pub quadrature: Vec<(f64, f64)>,
    pub params: ModelParams,
}

/// Assemble the master-equation generator on the truncated composite space.
///
/// The interaction uses exact operator exponentials of the truncated x̂;
/// the recoil integral ∫dcosθ N(cosθ) e^{ik_jx cosθ} ρ e^{−ik_jx cosθ} is
/// discretized on `quadrature_nodes` Gauss-Legendre nodes, which preserves
/// the trace exactly for the polynomial emission patterns used here.
pub fn build_full_liouvillian(
    params: &ModelParams,
    quadrature_nodes: usize,
) -> Result<FullLiouvillian> {
    params.validate()?;
    if quadrature_nodes < 1 {
        return Err(Error::InvalidArgument(
            "quadrature_nodes must be >= 1".into(),
        ));
    }
    let n_max = params.n_max;
    let space = Space::Composite { n_max };
    let (a, a_dag, x_op) = crate::operator::fock_operators(n_max)?;
    let id_e = Operator::identity(Space::Motional { n_max });

    // H_mec + H_0 (audited sign: ground manifold carries +delta)
    let mut h_num = a_dag.matmul(&a);
    for n in 0..=n_max {
        h_num.set(n, n, h_num.get(n, n) + C64::new(0.5, 0.0));
    }
    let mut h_int = Operator::zeros(Space::Internal);
    h_int.set(G1, G1, C64::new(params.delta, 0.0));
    h_int.set(G2, G2, C64::new(params.delta, 0.0));
    let mut h = Operator::kron(&Operator::identity(Space::Internal), &h_num)
        .add(&Operator::kron(&h_int, &id_e));

    // V(x) with exact recoil exponentials
    for (j, omega, eta, phi) in [
        (G1, params.omega1, params.eta1, params.phi1),
        (G2, params.omega2, params.eta2, params.phi2),
    ] {
        let u = phase_exponential(&x_op, -eta * phi.cos())?;
        let raise = Operator::kron(&Operator::dyad(Space::Internal, EXC, j), &u)
            .scale(C64::new(0.5 * omega, 0.0));
        h = h.add(&raise).add(&raise.dag());
    }

    let mut l = commutator_superop(&h);

    // spontaneous emission: -(gamma/2){P3, rho} + recoil-resolved feeding
    let p3 = Operator::kron(&Operator::dyad(Space::Internal, EXC, EXC), &id_e);
    l = l.sub(
        &SuperOp::left_mul(&p3)
            .add(&SuperOp::right_mul(&p3))
            .scale(C64::new(0.5 * params.gamma(), 0.0)),
    );
    let quadrature = gauss_legendre(quadrature_nodes);
    for (j, gamma_j, eta) in [
        (G1, params.gamma1, params.eta1),
        (G2, params.gamma2, params.eta2),
    ] {
        if gamma_j == 0.0 {
            continue;
        }
        for &(node, w) in &quadrature {
            let weight = gamma_j * w * params.pattern.density(node);
            if weight == 0.0 {
                continue;
            }
            let u = phase_exponential(&x_op, eta * node)?;
            let jump = Operator::kron(&Operator::dyad(Space::Internal, j, EXC), &u);
            l = l.add(&SuperOp::sandwich(&jump, &jump.dag()).scale(C64::new(weight, 0.0)));
        }
    }
    debug_assert_eq!(l.space(), space);
    Ok(FullLiouvillian {
        l,
        quadrature,
        params: params.clone(),
    })
}

/// Null-space eigenvalue tolerance: separates the stationary eigenvalue
/// from the slowest physical rate.
fn null_tol(eigenvalues: &[C64]) -> f64 {
    let radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    (1e-9 * radius).max(1e-12)
}

/// Unique steady state of the full Liouvillian: unit-trace, Hermitian,
/// positive semidefinite up to the eigenvalue floor.
///
/// Errors with [`Error::Degeneracy`] when the null space is not
/// one-dimensional (e.g. at η₁ = η₂ = 0, where the dark state decouples
/// from the motion and any motional state is stationary).
pub fn steady_state(full: &FullLiouvillian) -> Result<Operator> {
    let d = full.l.dim();
    let d2 = d * d;
    let eigenvalues = full
        .l
        .mat()
        .eigenvalues()
        .map_err(|e| Error::NumericalFailure(format!("Liouvillian eigenvalues: {e:?}")))?;
    let tol = null_tol(&eigenvalues);
    let null_count = eigenvalues.iter().filter(|l| l.norm() < tol).count();
    if null_count != 1 {
        return Err(Error::Degeneracy(format!(
            "Liouvillian null space has dimension {null_count} (tolerance {tol:.3e}); \
             the steady state is not unique"
        )));
    }

    // least-squares solve of the stacked system [L; trace-row] x = [0; 1]
    let mut stacked = Mat::<C64>::zeros(d2 + 1, d2);
    for i in 0..d2 {
        for j in 0..d2 {
            stacked[(i, j)] = full.l.mat()[(i, j)];
        }
    }
    for k in 0..d {
        stacked[(d2, k * d + k)] = C64::new(1.0, 0.0);
    }
    let mut rhs = Mat::<C64>::zeros(d2 + 1, 1);
    rhs[(d2, 0)] = C64::new(1.0, 0.0);
    let x = stacked.qr().solve_lstsq(&rhs);
    let rho_raw = Operator::from_fn(full.l.space(), |r, c| x[(c * d + r, 0)]);

    // hermitize, renormalize, validate
    let mut rho = rho_raw.add(&rho_raw.dag()).scale(C64::new(0.5, 0.0));
    let tr = rho.trace();
    if tr.norm() < 1e-8 {
        return Err(Error::NumericalFailure(
            "steady-state candidate has vanishing trace".into(),
        ));
    }
    rho = rho.scale(C64::new(1.0, 0.0) / tr);
    let resid = full.l.apply(&rho).norm_fro();
    let scale = full.l.norm_max().max(1.0);
    if resid > 1e-8 * scale {
        return Err(Error::NumericalFailure(format!(
            "steady-state residual ‖Lρ‖ = {resid:.3e}"
        )));
    }
    let herm_dev = rho.sub(&rho.dag()).norm_max();
    if herm_dev > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "steady state not Hermitian: {herm_dev:.3e}"
        )));
    }
    let eigs = rho
        .mat()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("steady-state spectrum: {e:?}")))?;
    let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < tolerances::POSITIVITY_FLOOR {
        return Err(Error::NumericalFailure(format!(
            "steady state not positive: min eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(rho)
}

/// Population of the topmost Fock level of a composite state; values above
/// ~1e-6 signal that the truncation is too small.
pub fn top_level_population(rho: &Operator) -> f64 {
    let n_max = match rho.space() {
        Space::Composite { n_max } => n_max,
        _ => panic!("composite state expected"),
    };
    let nm = n_max + 1;
    (0..3)
        .map(|i| rho.get(i * nm + n_max, i * nm + n_max).re)
        .sum()
}

/// Oracle spectrum on a frequency grid.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    /// (ω − ω_L1 in units of ν, S(ω)) pairs.
    pub points: Vec<(f64, f64)>,
    /// Weight of the elastic δ-peak, |Tr{D†ρ_st}|².
    pub elastic_weight: f64,
}

/// Spectrum by direct resolvent solves: for each ω on the grid, solve
/// (i(ω−ω_L1) − L)X = Dρ_st with D = exp(−iη₁cosψ x̂)|1⟩⟨3| and return
/// Re Tr{D†X}. The elastic pole is deflated by projecting the steady-state
/// direction out of the right-hand side and shifting it in the solve; its
/// weight is returned separately. Frequency points are solved concurrently.
pub fn oracle_spectrum(
    full: &FullLiouvillian,
    rho_st: &Operator,
    omega_grid: &[f64],
    psi: f64,
) -> Result<OracleSpectrum> {
    let params = &full.params;
    let n_max = params.n_max;
    let d = full.l.dim();
    let d2 = d * d;
    let (_, _, x_op) = crate::operator::fock_operators(n_max)?;
    let u = phase_exponential(&x_op, -params.eta1 * psi.cos())?;
    let dip = Operator::kron(&Operator::dyad(Space::Internal, G1, EXC), &u);
    let dip_dag = dip.dag();

    let d_rho = dip.matmul(rho_st);
    let coherent = d_rho.trace(); // Tr{D rho_st}
    let elastic_weight = coherent.norm_sqr();

    // deflated right-hand side; deflation adds vec(rho_st)·(trace row) to
    // the solve matrix so the stationary direction is shifted away from 0
    let rhs_op = d_rho.sub(&rho_st.scale(coherent));
    let mut base = Mat::<C64>::zeros(d2, d2);
    for i in 0..d2 {
        for j in 0..d2 {
            base[(i, j)] = -full.l.mat()[(i, j)];
        }
    }
    for k in 0..d {
        let col = k * d + k; // diagonal operand entries
        for row in 0..d2 {
            let (i, j) = (row % d, row / d);
            base[(row, col)] += rho_st.get(i, j);
        }
    }
    let mut rhs = Mat::<C64>::zeros(d2, 1);
    for row in 0..d2 {
        let (r, c) = (row % d, row / d);
        rhs[(row, 0)] = rhs_op.get(r, c);
    }

    let points: Result<Vec<(f64, f64)>> = omega_grid
        .par_iter()
        .map(|&w| {
            let mut m = base.clone();
            let iw = I * C64::new(w, 0.0);
            for k in 0..d2 {
                m[(k, k)] += iw;
            }
            let lu = PartialPivLu::new(m.as_ref());
            let x = lu.solve(&rhs);
            if !x.norm_l2().is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "resolvent solve failed at ω = {w}"
                )));
            }
            let mut s = C64::new(0.0, 0.0);
            for row in 0..d2 {
                let (r, c) = (row % d, row / d);
                // Tr{D† X} pairs D†[c, r] with X[r, c]
                s += dip_dag.get(c, r) * x[(row, 0)];
            }
            Ok((w, s.re))
        })
        .collect();

    Ok(OracleSpectrum {
        points: points?,
        elastic_weight,
    })
}
