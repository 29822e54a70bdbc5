//! Assembly of the second-order emission spectrum.
//!
//! The spectrum splits into S(ω) = S_el(ω) + S_M(ω) + S_SB(ω): a δ-peak at
//! the laser frequency whose weight is fourth order in the Lamb-Dicke
//! parameter, the Mollow-type inelastic part at the internal Liouvillian
//! frequencies λ_I and λ_I ± iν, and the two motional sidebands at
//! λ_I = 0, λ_E = ±iν. Each pole contributes Re[g(λ)/(i(ω−ω_L1) − λ)].
//!
//! Weights g(λ) = f⁽¹⁾(λ) + f⁽²⁾(λ) are evaluated from internal traces over
//! the 9-dimensional decomposition of L_I combined with closed-form traces
//! over the external degrees of freedom; the sidebands additionally admit a
//! closed Lorentzian form used for cross-checking.

use num_complex::Complex64 as C64;

use crate::composite::ZeroOrder;
use crate::error::{Error, Result};
use crate::model::{ExpansionOperators, ModelParams};
use crate::operator::Operator;
use crate::perturbation::{
    correct_eigenspace, phonon_coefficients, PerturbativeState, PhononCoefficients,
};
use crate::spectral::SpectralDecomposition;
use crate::tolerances;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Which part of the spectrum a pole belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralComponent {
    /// λ_I = 0, λ_E = ±iν: the Stokes/anti-Stokes sidebands.
    Sideband,
    /// λ_I ≠ 0 (any λ_E): the Mollow-type inelastic part.
    Mollow,
}

/// One pole of the second-order spectrum with its complex weight.
///
/// Contribution to the spectrum: Re[weight/(i(ω−ω_L1) − lambda)].
#[derive(Debug, Clone, Copy)]
pub struct LineShapeTerm {
    pub lambda: C64,
    pub weight: C64,
    pub component: SpectralComponent,
}

/// Closed-form external traces of the thermal motional state (units x₀ = 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct ExternalTraces {
    /// Tr_E{(P^{λE} μx)x} = (⟨n⟩+1)δ_{λE,iν} + ⟨n⟩δ_{λE,−iν}.
    pub mu_x: f64,
    /// Tr_E{(P^{λE} [x,μ])x} = −δ_{λE,iν} + δ_{λE,−iν}.
    pub comm: f64,
    /// Tr_E{x²μ} = 2⟨n⟩+1.
    pub x_sq: f64,
}

/// Evaluate the closed-form external traces at λ_E ∈ {0, ±iν}. Any other
/// λ_E yields the all-zero struct (those sectors do not contribute at
/// second order).
pub fn external_trace_identities(n_bar: f64, lambda_e: C64) -> ExternalTraces {
    let tol = 1e-9;
    let x_sq = 2.0 * n_bar + 1.0;
    if (lambda_e - I).norm() < tol {
        ExternalTraces {
            mu_x: n_bar + 1.0,
            comm: -1.0,
            x_sq,
        }
    } else if (lambda_e + I).norm() < tol {
        ExternalTraces {
            mu_x: n_bar,
            comm: 1.0,
            x_sq,
        }
    } else if lambda_e.norm() < tol {
        ExternalTraces {
            mu_x: 0.0,
            comm: 0.0,
            x_sq,
        }
    } else {
        ExternalTraces::default()
    }
}

/// (z − L_I)⁻¹ X via the internal decomposition.
fn res_minus(d: &SpectralDecomposition, z: C64, x: &Operator) -> Result<Operator> {
    d.resolvent_apply(z, &[], x)
}

/// (w + L_I)⁻¹ X = −(−w − L_I)⁻¹ X.
fn res_plus(d: &SpectralDecomposition, w: C64, x: &Operator) -> Result<Operator> {
    Ok(d.resolvent_apply(-w, &[], x)?.scale(C64::new(-1.0, 0.0)))
}

struct InternalContext<'a> {
    d: &'a SpectralDecomposition,
    d0: Operator,
    d0_dag: Operator,
    v1: &'a Operator,
    v2: &'a Operator,
    rho_dark: &'a Operator,
    v1_rho: Operator,      // V₁ ρ_D
    v1_comm_rho: Operator, // [V₁, ρ_D]
}

impl<'a> InternalContext<'a> {
    fn new(exp: &'a ExpansionOperators) -> Self {
        let d0 = Operator::dyad(
            crate::operator::Space::Internal,
            crate::operator::G1,
            crate::operator::EXC,
        );
        Self {
            d: &exp.internal_decomp,
            d0_dag: d0.dag(),
            d0,
            v1: &exp.v1,
            v2: &exp.v2,
            rho_dark: &exp.rho_dark,
            v1_rho: exp.v1.matmul(&exp.rho_dark),
            v1_comm_rho: exp.v1.commutator(&exp.rho_dark),
        }
    }

    /// f⁽¹⁾ for a pole at λ_E = 0 (Mollow poles λ = λ_I of group g): the
    /// λ_E' = ±iν contributions.
    fn f1_at_lambda_e_zero(&self, g: usize, n_bar: f64) -> Result<C64> {
        let lam_i = self.d.groups()[g].value;
        let mut acc = ZERO;
        for lam_ep in [I, -I] {
            let tr = external_trace_identities(n_bar, lam_ep);
            for (ext, operand) in [(tr.comm, &self.v1_rho), (tr.mu_x, &self.v1_comm_rho)] {
                if ext == 0.0 {
                    continue;
                }
                let y = res_plus(self.d, lam_ep, operand)?;
                let y = self.d0.matmul(&y);
                let y = res_minus(self.d, lam_i - lam_ep, &y)?;
                let y = self.v1.commutator(&y);
                let y = self.d.project(&[g], &y);
                acc += C64::new(ext, 0.0) * self.d0_dag.trace_with(&y);
            }
        }
        Ok(acc)
    }

    /// f⁽¹⁾ for a pole at λ_E = ±iν (group g): the λ_E' = 0 terms.
    fn f1_at_lambda_e_sideband(&self, g: usize, lam_e: C64, n_bar: f64) -> Result<C64> {
        let lam0 = self.d.groups()[g].value + lam_e;
        let tr = external_trace_identities(n_bar, lam_e);
        let mut acc = ZERO;
        for (ext, operand) in [(tr.comm, &self.v1_rho), (tr.mu_x, &self.v1_comm_rho)] {
            if ext == 0.0 {
                continue;
            }
            let y = res_plus(self.d, lam_e, operand)?;
            let y = self.d.project(&[g], &self.d0.matmul(&y));
            let y = self.v1.commutator(&y);
            let y = res_minus(self.d, lam0, &y)?;
            acc += C64::new(ext, 0.0) * self.d0_dag.trace_with(&y);
        }
        Ok(acc)
    }

    /// f⁽²⁾, nonzero only at λ_E = 0. Uses the group inverse of L_I
    /// (λ_I = 0 excluded; the operands are commutators, hence traceless).
    fn f2(&self, g: usize, n_bar: f64) -> Result<C64> {
        let mut acc = ZERO;
        for lam_ep in [I, -I] {
            let tr = external_trace_identities(n_bar, lam_ep);
            for (ext, operand) in [(tr.mu_x, &self.v1_comm_rho), (tr.comm, &self.v1_rho)] {
                if ext == 0.0 {
                    continue;
                }
                let y = res_plus(self.d, lam_ep, operand)?;
                let y = self.v1.commutator(&y);
                let y = self.d.group_inverse_apply(&y)?;
                let y = self.d.project(&[g], &self.d0.matmul(&y));
                acc -= C64::new(ext, 0.0) * self.d0_dag.trace_with(&y);
            }
        }
        let tr0 = external_trace_identities(n_bar, ZERO);
        let y = self.v2.commutator(self.rho_dark);
        let y = self.d.group_inverse_apply(&y)?;
        let y = self.d.project(&[g], &self.d0.matmul(&y));
        acc -= I * C64::new(0.5 * tr0.x_sq, 0.0) * self.d0_dag.trace_with(&y);
        Ok(acc)
    }
}

/// Spectral weights g(λ) = f⁽¹⁾(λ) + f⁽²⁾(λ) for every contributing pole.
///
/// Mollow poles keep their zero-order value λ_I + λ_E; the sideband poles
/// (λ_I = 0, λ_E = ±iν) carry the second-order shift, λ = ±i(ν+ν̄) − γ_S.
/// The pole at λ = 0 has identically vanishing second-order weight; it is
/// evaluated, checked, and dropped.
pub fn g_weights(
    exp: &ExpansionOperators,
    coeffs: &PhononCoefficients,
) -> Result<Vec<LineShapeTerm>> {
    let ctx = InternalContext::new(exp);
    let d = &exp.internal_decomp;
    let n_bar = coeffs.n_bar;
    let zero_group = d
        .group_near(ZERO)
        .ok_or_else(|| Error::NumericalFailure("L_I has no stationary eigenvalue".into()))?;

    let mut terms: Vec<LineShapeTerm> = Vec::new();
    let mut weight_scale = 0.0f64;
    for (g, group) in d.groups().iter().enumerate() {
        let lam_i = group.value;
        let w0 = ctx.f1_at_lambda_e_zero(g, n_bar)? + ctx.f2(g, n_bar)?;
        if g == zero_group {
            // second-order weight at the elastic pole vanishes identically
            let floor = 1e-14 * ctx.v1_rho.norm_fro().powi(2).max(1e-300);
            if w0.norm() > floor {
                return Err(Error::NumericalFailure(format!(
                    "nonzero second-order weight {:.3e} at the λ = 0 pole",
                    w0.norm()
                )));
            }
        } else {
            weight_scale = weight_scale.max(w0.norm());
            terms.push(LineShapeTerm {
                lambda: lam_i,
                weight: w0,
                component: SpectralComponent::Mollow,
            });
        }
        for lam_e in [I, -I] {
            let w = ctx
                .f1_at_lambda_e_sideband(g, lam_e, n_bar)
                .map_err(|e| match e {
                    Error::Singularity { z, eigenvalue, .. } => Error::Singularity {
                        z,
                        eigenvalue,
                        context: format!("sideband trace at λ_I = {lam_i}, λ_E = {lam_e}"),
                    },
                    other => other,
                })?;
            weight_scale = weight_scale.max(w.norm());
            if g == zero_group {
                // pole shifted by the second-order eigenvalue correction
                // λ₂ = ±iν̄ − γ_S/2 in the matching sector: the coherence
                // decays at half the population cooling rate
                let lambda = lam_e + C64::new(-0.5 * coeffs.gamma_s, coeffs.nu_bar * lam_e.im);
                terms.push(LineShapeTerm {
                    lambda,
                    weight: w,
                    component: SpectralComponent::Sideband,
                });
            } else {
                terms.push(LineShapeTerm {
                    lambda: lam_i + lam_e,
                    weight: w,
                    component: SpectralComponent::Mollow,
                });
            }
        }
    }
    // drop numerically empty poles; they carry no spectral content
    let floor = 1e-16 * weight_scale;
    terms.retain(|t| t.weight.norm() > floor);
    Ok(terms)
}

/// Closed form of the sideband spectrum.
///
/// Each sideband is a Lorentzian centered at ±(ν+ν̄) whose half width is
/// the coherence decay rate γ_S/2 (half the population cooling rate; the
/// full master equation confirms both rates) and whose peak height is the
/// pole weight divided by the half width,
/// s₀ = 2(Ω₂²/γΩ²)⟨n⟩(1+⟨n⟩).
#[derive(Debug, Clone, Copy)]
pub struct SidebandForm {
    /// f(λ_E = +iν).
    pub f_plus: C64,
    /// f(λ_E = −iν).
    pub f_minus: C64,
    /// Peak height at the sideband centers.
    pub s0: f64,
    /// The rate-normalized height (Ω₂²/γΩ²)⟨n⟩(1+⟨n⟩), i.e. weight/γ_S;
    /// half the peak height.
    pub s0_rate_form: f64,
    /// The same quantity in laser parameters only (cross-check; None where
    /// its denominator degenerates).
    pub s0_rate_form_alt: Option<f64>,
    /// Sideband centers ±(ν+ν̄).
    pub center: f64,
    /// Half width at half maximum, γ_S/2.
    pub half_width: f64,
}

impl SidebandForm {
    /// S_SB at ω − ω_L1 = `domega`: two Lorentzians of height s₀.
    pub fn sample(&self, domega: f64) -> f64 {
        let g2 = self.half_width * self.half_width;
        let mut s = 0.0;
        for sign in [-1.0, 1.0] {
            let dx = domega + sign * self.center;
            s += self.s0 * g2 / (dx * dx + g2);
        }
        s
    }
}

/// Closed form f(λ_E) = −2iηλ_EΩ₁Ω₂²/(Ω²(Ω² + 4λ_E(iδ + λ_E + γ/2))).
pub fn f_closed_form(params: &ModelParams, lambda_e: C64) -> C64 {
    let om_sq = params.omega_sq();
    let eta = params.eta();
    let num =
        C64::new(0.0, -2.0) * lambda_e * (eta * params.omega1 * params.omega2 * params.omega2);
    let den = (C64::new(om_sq, 0.0)
        + C64::new(4.0, 0.0)
            * lambda_e
            * (C64::new(0.0, params.delta) + lambda_e + C64::new(0.5 * params.gamma(), 0.0)))
        * om_sq;
    num / den
}

/// Trace route for the same quantity: f(λ_E) = Tr_I{D₀†(λ_E − L_I)⁻¹[V₁, ρ_D]}.
pub fn f_trace_formula(exp: &ExpansionOperators, lambda_e: C64) -> Result<C64> {
    let d0_dag = Operator::dyad(
        crate::operator::Space::Internal,
        crate::operator::EXC,
        crate::operator::G1,
    );
    let y = res_minus(
        &exp.internal_decomp,
        lambda_e,
        &exp.v1.commutator(&exp.rho_dark),
    )?;
    Ok(d0_dag.trace_with(&y))
}

/// Sideband amplitudes and the Lorentzian sideband spectrum in closed form.
pub fn sideband_closed_form(
    params: &ModelParams,
    coeffs: &PhononCoefficients,
) -> Result<SidebandForm> {
    if coeffs.gamma_s <= 0.0 {
        return Err(Error::HeatingRegime {
            a_plus: coeffs.a_plus,
            a_minus: coeffs.a_minus,
            gamma_s: coeffs.gamma_s,
        });
    }
    let f_plus = f_closed_form(params, I);
    let f_minus = f_closed_form(params, -I);
    let om_sq = params.omega_sq();
    let s0_rate_form = params.omega2 * params.omega2 / (params.gamma() * om_sq)
        * coeffs.n_bar
        * (1.0 + coeffs.n_bar);
    let eta_sq = params.eta() * params.eta();
    let s0_rate_form_alt = if eta_sq > 0.0 {
        let gs_tilde = coeffs.gamma_s / eta_sq;
        let den = 4.0 * gs_tilde * params.delta * om_sq * om_sq * (om_sq - 4.0);
        (den.abs() > 1e-12)
            .then(|| params.omega1 * params.omega1 * params.omega2.powi(4) / den)
    } else {
        None
    };
    Ok(SidebandForm {
        f_plus,
        f_minus,
        s0: 2.0 * s0_rate_form,
        s0_rate_form,
        s0_rate_form_alt,
        center: 1.0 + coeffs.nu_bar,
        half_width: 0.5 * coeffs.gamma_s,
    })
}

/// Elastic-peak weight |Tr{D₀†ρ₂} + Tr{D₁†ρ₁}|² from the corrected steady
/// state (fourth order in the Lamb-Dicke parameters; ψ-dependent through D₁).
pub fn elastic_peak_weight(exp: &ExpansionOperators, state: &PerturbativeState) -> f64 {
    let t = exp.d0.dag().trace_with(&state.rho2) + exp.d1.dag().trace_with(&state.rho1);
    t.norm_sqr()
}

/// Outcome of the vanishing-order property suite.
#[derive(Debug, Clone)]
pub struct VanishingReport {
    /// max |Tr{D₀†P₀D₀ρ₀}| over poles (zero-order spectrum).
    pub s0_terms_max: f64,
    /// max over the four first-order trace terms and poles.
    pub s1_terms_max: f64,
    /// The six second-order terms that must vanish, max over poles:
    /// D₁†P₁D₀ρ₀, D₀†P₁D₁ρ₀, D₁†P₀D₀ρ₁, D₀†P₀D₁ρ₁, D₂†P₀D₀ρ₀, D₀†P₀D₂ρ₀.
    pub second_order_terms_max: [f64; 6],
    /// max relative change of S₂ under ψ → ψ + 0.7.
    pub psi_shift_max_rel: f64,
    /// max relative change of S₂ under β → 2β.
    pub beta_swap_max_rel: f64,
    /// Reference weight s₀γ_S (sideband pole weight).
    pub reference_weight: f64,
    /// Reference height s₀ (sideband peak height).
    pub reference_height: f64,
    pub passed: bool,
}

impl VanishingReport {
    pub fn ensure(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::NumericalFailure(format!(
                "vanishing-order checks failed: {self:?}"
            )))
        }
    }
}

/// Second-order weights f⁽¹⁾ + f⁽²⁾ per pole, evaluated entirely on the
/// composite space from the perturbative steady-state corrections. Slower
/// than [`g_weights`] but independent of the separated trace formulas;
/// used by the property suite and cross-check tests.
pub(crate) fn composite_second_order_terms(
    exp: &ExpansionOperators,
    state0: &PerturbativeState,
) -> Result<Vec<(C64, C64)>> {
    let zo = ZeroOrder::new(exp);
    let d0rho1 = exp.d0.matmul(&state0.rho1);
    let d0rho2 = exp.d0.matmul(&state0.rho2);
    let mut out = Vec::new();
    for ell in -1i64..=1 {
        for g in 0..exp.internal_decomp.groups().len() {
            let lam0 = exp.internal_decomp.groups()[g].value + C64::new(0.0, ell as f64);
            let groups = zo.groups_at(lam0);
            // f1 = Tr{D0† P1 D0 rho1} with P1 = R0 L1 P0 + P0 L1 R0
            let px = zo.project(&groups, &d0rho1);
            let t1a = zo.resolvent(lam0, &groups, &exp.apply_l1(&px))?;
            let rx = zo.resolvent(lam0, &groups, &d0rho1)?;
            let t1b = zo.project(&groups, &exp.apply_l1(&rx));
            let f1 = exp.d0.dag().trace_with(&t1a.add(&t1b));
            // f2 = Tr{D0† P0 D0 rho2}
            let f2 = exp.d0.dag().trace_with(&zo.project(&groups, &d0rho2));
            out.push((lam0, f1 + f2));
        }
    }
    Ok(out)
}

fn sample_terms(terms: &[(C64, C64)], domega: f64) -> f64 {
    terms
        .iter()
        .map(|&(lam, w)| (w / (C64::new(0.0, domega) - lam)).re)
        .sum()
}

/// Evaluate the zero-, first-, and vanishing second-order trace terms, and
/// the detector-angle/emission-pattern invariance of the full second-order
/// spectrum. This is the primary regression tripwire for the perturbative
/// machinery.
pub fn vanishing_order_checks(exp: &ExpansionOperators) -> Result<VanishingReport> {
    let zo = ZeroOrder::new(exp);
    let coeffs = phonon_coefficients(exp)?;
    let sb = sideband_closed_form(&exp.params, &coeffs)?;
    let reference_weight = sb.s0 * sb.half_width;
    let reference_height = sb.s0;

    let state0 = correct_eigenspace(exp, ZERO)?;
    let rho0 = &state0.rho0;
    let rho1 = &state0.rho1;

    let d0rho0 = exp.d0.matmul(rho0);
    let d1rho0 = exp.d1.matmul(rho0);
    let d2rho0 = exp.d2.matmul(rho0);
    let d0rho1 = exp.d0.matmul(rho1);
    let d1rho1 = exp.d1.matmul(rho1);

    let mut s0_max = 0.0f64;
    let mut s1_max = 0.0f64;
    let mut six = [0.0f64; 6];
    for ell in -2i64..=2 {
        for g in 0..exp.internal_decomp.groups().len() {
            let lam0 = exp.internal_decomp.groups()[g].value + C64::new(0.0, ell as f64);
            let groups = zo.groups_at(lam0);
            let p0 = |x: &Operator| zo.project(&groups, x);
            let p1 = |x: &Operator| -> Result<Operator> {
                let first = zo.resolvent(lam0, &groups, &exp.apply_l1(&p0(x)))?;
                let second = p0(&exp.apply_l1(&zo.resolvent(lam0, &groups, x)?));
                Ok(first.add(&second))
            };
            let tr = |a: &Operator, x: &Operator| a.dag().trace_with(x).norm();

            s0_max = s0_max.max(tr(&exp.d0, &p0(&d0rho0)));
            // first order: D0†P1D0ρ0, D1†P0D0ρ0, D0†P0D1ρ0, D0†P0D0ρ1
            s1_max = s1_max
                .max(tr(&exp.d0, &p1(&d0rho0)?))
                .max(tr(&exp.d1, &p0(&d0rho0)))
                .max(tr(&exp.d0, &p0(&d1rho0)))
                .max(tr(&exp.d0, &p0(&d0rho1)));
            six[0] = six[0].max(tr(&exp.d1, &p1(&d0rho0)?));
            six[1] = six[1].max(tr(&exp.d0, &p1(&d1rho0)?));
            six[2] = six[2].max(tr(&exp.d1, &p0(&d0rho1)));
            six[3] = six[3].max(tr(&exp.d0, &p0(&d1rho1)));
            six[4] = six[4].max(tr(&exp.d2, &p0(&d0rho0)));
            six[5] = six[5].max(tr(&exp.d0, &p0(&d2rho0)));
        }
    }

    // full S2 under detector-angle shift and emission-pattern swap
    let freqs: Vec<f64> = (0..11).map(|k| -2.5 + 0.5 * k as f64).collect();
    let base_terms = composite_second_order_terms(exp, &state0)?;
    let smax = freqs
        .iter()
        .map(|&w| sample_terms(&base_terms, w).abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut psi_params = exp.params.clone();
    psi_params.psi += 0.7;
    let psi_exp = crate::model::build_expansion(&psi_params)?;
    let psi_state = correct_eigenspace(&psi_exp, ZERO)?;
    let psi_terms = composite_second_order_terms(&psi_exp, &psi_state)?;
    let psi_dev = freqs
        .iter()
        .map(|&w| (sample_terms(&psi_terms, w) - sample_terms(&base_terms, w)).abs())
        .fold(0.0f64, f64::max)
        / smax;

    let mut beta_params = exp.params.clone();
    beta_params.pattern = crate::model::EmissionPattern::Custom {
        beta: 2.0 * exp.params.beta(),
    };
    let beta_exp = crate::model::build_expansion(&beta_params)?;
    let beta_state = correct_eigenspace(&beta_exp, ZERO)?;
    let beta_terms = composite_second_order_terms(&beta_exp, &beta_state)?;
    let beta_dev = freqs
        .iter()
        .map(|&w| (sample_terms(&beta_terms, w) - sample_terms(&base_terms, w)).abs())
        .fold(0.0f64, f64::max)
        / smax;

    let wtol = tolerances::VANISHING_REL * reference_weight;
    let htol = tolerances::VANISHING_REL * reference_height;
    let passed = s0_max < htol
        && s1_max < htol.max(wtol)
        && six.iter().all(|&v| v < wtol)
        && psi_dev < tolerances::VANISHING_REL
        && beta_dev < tolerances::VANISHING_REL;

    Ok(VanishingReport {
        s0_terms_max: s0_max,
        s1_terms_max: s1_max,
        second_order_terms_max: six,
        psi_shift_max_rel: psi_dev,
        beta_swap_max_rel: beta_dev,
        reference_weight,
        reference_height,
        passed,
    })
}

/// Per-run summary scalars attached to a sampled spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumSummary {
    pub coeffs: PhononCoefficients,
    /// Sideband peak height.
    pub s0: f64,
    /// Rate-normalized height (Ω₂²/γΩ²)⟨n⟩(1+⟨n⟩) = s0/2.
    pub s0_rate_form: f64,
    /// Cross-check of the rate-normalized height in laser parameters only.
    pub s0_rate_form_alt: Option<f64>,
    /// Sideband half width γ_S/2.
    pub sideband_half_width: f64,
    /// Distinct internal eigenvalues λ_I (group representatives).
    pub lambda_internal: Vec<C64>,
}

/// Sampled spectrum split by component. The elastic δ-peak is reported as a
/// weight and never rasterized onto the grid.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub omega_grid: Vec<f64>,
    pub s_total: Vec<f64>,
    pub s_sb: Vec<f64>,
    pub s_m: Vec<f64>,
    pub elastic_weight: f64,
    pub terms: Vec<LineShapeTerm>,
    pub summary: Option<SpectrumSummary>,
}

/// Sample the pole expansion on a frequency grid (ω − ω_L1 in units of ν).
pub fn sample_spectrum(
    terms: &[LineShapeTerm],
    elastic_weight: f64,
    omega_grid: &[f64],
) -> SpectrumResult {
    let mut s_sb = vec![0.0; omega_grid.len()];
    let mut s_m = vec![0.0; omega_grid.len()];
    for (k, &w) in omega_grid.iter().enumerate() {
        let iw = C64::new(0.0, w);
        for t in terms {
            let v = (t.weight / (iw - t.lambda)).re;
            match t.component {
                SpectralComponent::Sideband => s_sb[k] += v,
                SpectralComponent::Mollow => s_m[k] += v,
            }
        }
    }
    let s_total: Vec<f64> = s_sb.iter().zip(&s_m).map(|(a, b)| a + b).collect();
    SpectrumResult {
        omega_grid: omega_grid.to_vec(),
        s_total,
        s_sb,
        s_m,
        elastic_weight,
        terms: terms.to_vec(),
        summary: None,
    }
}

/// End-to-end second-order spectrum for the given parameters.
///
/// The Fock truncation is raised to max(n_max, 15, ⌈8⟨n⟩⌉) before the
/// composite-space corrections are evaluated; thermal tails decay
/// geometrically, so this keeps the elastic weight truncation-converged.
pub fn compute_spectrum(params: &ModelParams, omega_grid: &[f64]) -> Result<SpectrumResult> {
    params.validate()?;
    let n_est = {
        let sp = crate::perturbation::s_closed_form(params, 1.0);
        let sm = crate::perturbation::s_closed_form(params, -1.0);
        let gs = 2.0 * (sm.re - sp.re);
        if gs > 0.0 {
            2.0 * sp.re / gs
        } else {
            0.0
        }
    };
    let mut p = params.clone();
    p.n_max = params.n_max.max(15).max((8.0 * n_est).ceil() as usize);
    let exp = crate::model::build_expansion(&p)?;
    let coeffs = phonon_coefficients(&exp)?;
    let terms = g_weights(&exp, &coeffs)?;
    let state0 = correct_eigenspace(&exp, ZERO)?;
    let elastic = elastic_peak_weight(&exp, &state0);
    let sb = sideband_closed_form(&p, &coeffs)?;
    let mut result = sample_spectrum(&terms, elastic, omega_grid);
    result.summary = Some(SpectrumSummary {
        coeffs,
        s0: sb.s0,
        s0_rate_form: sb.s0_rate_form,
        s0_rate_form_alt: sb.s0_rate_form_alt,
        sideband_half_width: sb.half_width,
        lambda_internal: exp
            .internal_decomp
            .groups()
            .iter()
            .map(|g| g.value)
            .collect(),
    });
    Ok(result)
}
