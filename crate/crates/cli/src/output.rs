//! Runners for the five subcommands and their file outputs.
//!
//! All data files are deterministic: CSV floats carry 17 significant digits
//! with LF line endings, JSON field order is fixed by struct declaration,
//! and the only time-dependent content is an optional metadata block.

use std::io::Write;
use std::path::{Path, PathBuf};

use lamfluor::{
    build_expansion, build_full_liouvillian, compute_spectrum, detuning_sign_audit,
    f_closed_form, f_trace_formula, g_weights, oracle_spectrum, phonon_coefficients,
    phonon_effective_eigensystem, sideband_closed_form, steady_state, top_level_population,
    vanishing_order_checks, DetuningSign, Error as CoreError, ModelParams, SpectralComponent,
    SpectrumResult, C64,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::InvalidArgument(msg) => CliError::Config(msg),
        CoreError::HeatingRegime {
            a_plus,
            a_minus,
            gamma_s,
        } => CliError::Physics(format!(
            "heating regime: gamma_S = {gamma_s:.6e} <= 0 (A+ = {a_plus:.6e}, A- = {a_minus:.6e})"
        )),
        other => CliError::Numerical(other.to_string()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    generated_unix: u64,
}

fn metadata(no_metadata: bool) -> Option<Metadata> {
    if no_metadata {
        return None;
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Some(Metadata {
        tool: "lamfluor",
        version: env!("CARGO_PKG_VERSION"),
        generated_unix: secs,
    })
}

#[derive(Serialize)]
struct SummaryJson {
    n_bar: f64,
    a_plus: f64,
    a_minus: f64,
    gamma_s: f64,
    nu_bar: f64,
    s0: f64,
    s0_rate_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s0_rate_form_alt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s0_rate_form_rel_dev: Option<f64>,
    sideband_half_width: f64,
    elastic_weight: f64,
    eta: f64,
    lambda_internal: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<Metadata>,
}

fn summary_json(
    result: &SpectrumResult,
    params: &ModelParams,
    no_metadata: bool,
) -> Result<String, CliError> {
    let summary = result
        .summary
        .as_ref()
        .ok_or_else(|| CliError::Numerical("spectrum result lacks summary".into()))?;
    let c = &summary.coeffs;
    let s0_rate_form_rel_dev = summary.s0_rate_form_alt.map(|alt| {
        (alt - summary.s0_rate_form).abs() / summary.s0_rate_form.abs().max(f64::MIN_POSITIVE)
    });
    let json = SummaryJson {
        n_bar: c.n_bar,
        a_plus: c.a_plus,
        a_minus: c.a_minus,
        gamma_s: c.gamma_s,
        nu_bar: c.nu_bar,
        s0: summary.s0,
        s0_rate_form: summary.s0_rate_form,
        s0_rate_form_alt: summary.s0_rate_form_alt,
        s0_rate_form_rel_dev,
        sideband_half_width: summary.sideband_half_width,
        elastic_weight: result.elastic_weight,
        eta: params.eta(),
        lambda_internal: summary.lambda_internal.iter().map(|l| [l.re, l.im]).collect(),
        metadata: metadata(no_metadata),
    };
    if let Some(dev) = s0_rate_form_rel_dev {
        if dev > 1e-6 {
            eprintln!("note: the two closed forms of s0 deviate by {dev:.3e} (relative)");
        }
    }
    serde_json::to_string_pretty(&json)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn run_summary(cfg: &RunConfig, out: &Path, no_metadata: bool) -> Result<(), CliError> {
    let params = cfg.params();
    // a single-point grid; only the scalars are needed
    let result = compute_spectrum(&params, &[0.0]).map_err(core_err)?;
    let text = summary_json(&result, &params, no_metadata)?;
    write_file(&out.join("summary.json"), &text)?;
    println!("wrote {}", out.join("summary.json").display());
    Ok(())
}

fn spectrum_csv(result: &SpectrumResult) -> String {
    let mut csv = String::from("omega,S_total,S_SB,S_M\n");
    for k in 0..result.omega_grid.len() {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            result.omega_grid[k], result.s_total[k], result.s_sb[k], result.s_m[k]
        ));
    }
    csv
}

/// Dense frequency windows across both sideband centers, ±10 half-widths.
fn sideband_window_grid(result: &SpectrumResult) -> Vec<f64> {
    let (center, width) = result
        .summary
        .as_ref()
        .map(|s| (1.0 + s.coeffs.nu_bar, s.sideband_half_width))
        .unwrap_or((1.0, 1e-3));
    let mut grid = Vec::with_capacity(402);
    for &c in &[-center, center] {
        for k in 0..=200 {
            grid.push(c + (k as f64 - 100.0) * width * 0.1);
        }
    }
    grid
}

fn plot_script(cfg: &RunConfig, result: &SpectrumResult) -> String {
    let (center, width) = result
        .summary
        .as_ref()
        .map(|s| (1.0 + s.coeffs.nu_bar, s.sideband_half_width))
        .unwrap_or((1.0, 1e-3));
    let (lo, hi) = (cfg.grid.omega_min, cfg.grid.omega_max);
    let (zlo, zhi) = (-center - 10.0 * width, -center + 10.0 * width);
    format!(
        "# gnuplot script: main panel with Stokes-sideband inset\n\
         set datafile separator ','\n\
         set terminal pngcairo size 960,680\n\
         set output 'spectrum.png'\n\
         set multiplot\n\
         set origin 0.0,0.0\n\
         set size 1.0,1.0\n\
         set xrange [{lo}:{hi}]\n\
         set xlabel '(omega - omega_L1)/nu'\n\
         set ylabel 'S(omega) (arb. units)'\n\
         set key top left\n\
         plot 'spectrum.csv' skip 1 using 1:3 with lines lw 2 title 'sidebands', \\\n\
              'spectrum.csv' skip 1 using 1:4 with lines dashtype 2 lw 2 title 'inelastic (Mollow-type)'\n\
         set origin 0.58,0.52\n\
         set size 0.38,0.42\n\
         set xrange [{zlo:.9}:{zhi:.9}]\n\
         unset xlabel\n\
         unset ylabel\n\
         unset key\n\
         set xtics ({:.6}, {:.6}, {:.6}) font ',8'\n\
         plot 'sideband.csv' skip 1 using 1:2 with lines lw 2\n\
         unset multiplot\n",
        -center - 8.0 * width,
        -center,
        -center + 8.0 * width,
    )
}

pub fn run_spectrum(cfg: &RunConfig, out: &Path, no_metadata: bool) -> Result<(), CliError> {
    let params = cfg.params();
    let grid = cfg.grid_points();
    let result = compute_spectrum(&params, &grid).map_err(core_err)?;
    // dense zoom across the sidebands, resampled from the same poles
    let window = sideband_window_grid(&result);
    let zoom = lamfluor::sample_spectrum(&result.terms, result.elastic_weight, &window);
    write_file(&out.join("spectrum.csv"), &spectrum_csv(&result))?;
    write_file(&out.join("sideband.csv"), &spectrum_csv(&zoom))?;
    write_file(
        &out.join("summary.json"),
        &summary_json(&result, &params, no_metadata)?,
    )?;
    write_file(&out.join("plot.gp"), &plot_script(cfg, &result))?;
    for name in ["spectrum.csv", "sideband.csv", "summary.json", "plot.gp"] {
        println!("wrote {}", out.join(name).display());
    }
    Ok(())
}

pub fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let params = cfg.oracle_params();
    let full = build_full_liouvillian(&params, cfg.oracle.quadrature_nodes).map_err(core_err)?;
    let rho = steady_state(&full).map_err(core_err)?;
    let top = top_level_population(&rho);
    if top > 1e-6 {
        eprintln!(
            "warning: steady-state population {top:.3e} at the top Fock level; \
             increase oracle.n_max"
        );
    }
    let grid = cfg.grid_points();
    let spec = oracle_spectrum(&full, &rho, &grid, params.psi).map_err(core_err)?;
    let mut csv = String::from("omega,S_oracle\n");
    for (w, s) in &spec.points {
        csv.push_str(&format!("{:.16e},{:.16e}\n", w, s));
    }
    write_file(&out.join("oracle.csv"), &csv)?;
    println!("wrote {}", out.join("oracle.csv").display());
    Ok(())
}

/// Quoted mean phonon numbers for the bundled presets, keyed by the laser
/// parameters. The three δ = {0.5, 3.5, 10}ν entries are known to disagree
/// with the closed-form result by roughly 20-25%; the gap is reported, not
/// reconciled.
const QUOTED_REFERENCES: &[(&str, f64, f64, f64, f64, f64)] = &[
    // (label, omega1, omega2, gamma, delta, quoted n_bar)
    ("fig2", 8.5, 8.5, 10.0, 35.0, 0.005),
    ("fig4", 8.5, 8.5, 10.0, 15.0, 0.2),
    ("fig3a", 10.0, 10.0, 5.0, 0.5, 30.0),
    ("fig3b", 10.0, 10.0, 5.0, 3.5, 3.8),
    ("fig3c", 10.0, 10.0, 5.0, 10.0, 1.0),
];

#[derive(Serialize)]
struct QuotedReference {
    preset: String,
    quoted_n_bar: f64,
    computed_n_bar: f64,
    relative_gap: f64,
    note: String,
}

#[derive(Serialize)]
struct SidebandCompare {
    centers: [f64; 2],
    peak_perturbative: [f64; 2],
    peak_oracle: [f64; 2],
    peak_rel_dev: [f64; 2],
    /// Population cooling rate A₋ − A₊.
    gamma_s: f64,
    /// Predicted sideband half width γ_S/2.
    predicted_halfwidth: f64,
    oracle_halfwidth: f64,
    halfwidth_rel_dev: f64,
    window_max_rel_dev: f64,
    elastic_weight_perturbative: f64,
    elastic_weight_oracle: f64,
}

#[derive(Serialize)]
struct MollowProbe {
    omega: f64,
    perturbative: f64,
    oracle: f64,
    rel_dev: f64,
}

#[derive(Serialize)]
struct CompareJson {
    n_bar_perturbative: f64,
    gamma_s: f64,
    nu_bar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    quoted_reference: Option<QuotedReference>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sidebands: Option<SidebandCompare>,
    /// Spot checks of the inelastic component away from the sidebands.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    mollow_probes: Vec<MollowProbe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mollow_probes_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_truncation_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<Metadata>,
}

fn quoted_reference(params: &ModelParams, n_bar: f64) -> Option<QuotedReference> {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    for &(label, o1, o2, g, d, quoted) in QUOTED_REFERENCES {
        if close(params.omega1, o1)
            && close(params.omega2, o2)
            && close(params.gamma(), g)
            && close(params.delta, d)
        {
            let gap = (n_bar - quoted).abs() / quoted;
            let note = if gap > 0.1 {
                format!(
                    "computed <n> deviates from the quoted preset value by {:.0}%; the quoted \
                     value is known to disagree with the closed-form coefficients for this \
                     parameter set and the gap is documented, not reconciled",
                    100.0 * gap
                )
            } else {
                format!("computed <n> within {:.1}% of the quoted preset value", 100.0 * gap)
            };
            return Some(QuotedReference {
                preset: label.to_string(),
                quoted_n_bar: quoted,
                computed_n_bar: n_bar,
                relative_gap: gap,
                note,
            });
        }
    }
    None
}

/// Half width at half maximum from sampled points around one peak, by
/// linear interpolation of the crossings.
fn fitted_hwhm(points: &[(f64, f64)]) -> Option<f64> {
    let (kmax, &(wmax, smax)) = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())?;
    let half = smax / 2.0;
    let mut left = None;
    for k in (1..=kmax).rev() {
        let (w0, s0) = points[k - 1];
        let (w1, s1) = points[k];
        if s0 <= half && s1 >= half {
            left = Some(w0 + (half - s0) / (s1 - s0) * (w1 - w0));
            break;
        }
    }
    let mut right = None;
    for k in kmax..points.len() - 1 {
        let (w0, s0) = points[k];
        let (w1, s1) = points[k + 1];
        if s0 >= half && s1 <= half {
            right = Some(w0 + (half - s0) / (s1 - s0) * (w1 - w0));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some(((r - l) / 2.0).abs()),
        (Some(l), None) => Some((wmax - l).abs()),
        (None, Some(r)) => Some((r - wmax).abs()),
        (None, None) => None,
    }
}

pub fn run_compare(cfg: &RunConfig, out: &Path, no_metadata: bool) -> Result<(), CliError> {
    let params = cfg.params();
    let exp = build_expansion(&params).map_err(core_err)?;
    let coeffs = phonon_coefficients(&exp).map_err(core_err)?;
    let sb = sideband_closed_form(&params, &coeffs).map_err(core_err)?;

    let mut json = CompareJson {
        n_bar_perturbative: coeffs.n_bar,
        gamma_s: coeffs.gamma_s,
        nu_bar: coeffs.nu_bar,
        quoted_reference: quoted_reference(&params, coeffs.n_bar),
        sidebands: None,
        mollow_probes: Vec::new(),
        mollow_probes_note: None,
        oracle_error: None,
        oracle_truncation_population: None,
        metadata: metadata(no_metadata),
    };

    // oracle side; failures are recorded, not fatal
    let oracle_params = cfg.oracle_params();
    let attempt = (|| -> Result<(SidebandCompare, Vec<MollowProbe>, f64), CoreError> {
        let full = build_full_liouvillian(&oracle_params, cfg.oracle.quadrature_nodes)?;
        let rho = steady_state(&full)?;
        let top = top_level_population(&rho);
        // dense windows around the two sideband centers, then a handful of
        // probes in the inelastic region
        let centers = [-sb.center, sb.center];
        let half = sb.half_width;
        let mut window = Vec::new();
        for &c in &centers {
            for k in 0..41 {
                window.push(c + (k as f64 - 20.0) * half * 0.4);
            }
        }
        let probe_at: Vec<f64> = vec![0.0, -0.5, 0.5, -2.0, 2.0];
        window.extend(&probe_at);
        let oracle = oracle_spectrum(&full, &rho, &window, oracle_params.psi)?;
        let pert = compute_spectrum(&params, &window)?;
        let mut peak_pert = [0.0f64; 2];
        let mut peak_oracle = [0.0f64; 2];
        let mut max_rel = 0.0f64;
        for (half_idx, chunk) in oracle.points[..82].chunks(41).enumerate() {
            let (kmax, &(_, smax)) = chunk
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
                .unwrap();
            peak_oracle[half_idx] = smax;
            peak_pert[half_idx] = pert.s_total[half_idx * 41 + kmax];
        }
        for (k, &(_, s_o)) in oracle.points[..82].iter().enumerate() {
            let s_p = pert.s_total[k];
            let rel = (s_p - s_o).abs() / peak_oracle[0].max(peak_oracle[1]);
            max_rel = max_rel.max(rel);
        }
        let probes = oracle.points[82..]
            .iter()
            .enumerate()
            .map(|(k, &(w, s_o))| {
                let s_p = pert.s_total[82 + k];
                MollowProbe {
                    omega: w,
                    perturbative: s_p,
                    oracle: s_o,
                    rel_dev: (s_p - s_o).abs() / s_o.abs().max(f64::MIN_POSITIVE),
                }
            })
            .collect();
        let hw = fitted_hwhm(&oracle.points[0..41]).unwrap_or(f64::NAN);
        let elastic_pert = pert.elastic_weight;
        Ok((
            SidebandCompare {
                centers,
                peak_perturbative: peak_pert,
                peak_oracle,
                peak_rel_dev: [
                    (peak_pert[0] - peak_oracle[0]).abs() / peak_oracle[0],
                    (peak_pert[1] - peak_oracle[1]).abs() / peak_oracle[1],
                ],
                gamma_s: coeffs.gamma_s,
                predicted_halfwidth: sb.half_width,
                oracle_halfwidth: hw,
                halfwidth_rel_dev: (hw - sb.half_width).abs() / sb.half_width,
                window_max_rel_dev: max_rel,
                elastic_weight_perturbative: elastic_pert,
                elastic_weight_oracle: oracle.elastic_weight,
            },
            probes,
            top,
        ))
    })();
    match attempt {
        Ok((sbc, probes, top)) => {
            json.sidebands = Some(sbc);
            if probes.iter().any(|p| p.rel_dev > 1.0) {
                json.mollow_probes_note = Some(
                    "second-order theory overestimates inelastic features whose pole lies \
                     within the Lamb-Dicke coupling of another zero-order pole (parameters \
                     tuned near Im lambda_I = -nu); large deviations here flag that regime, \
                     the sidebands and the remaining probes are unaffected"
                        .into(),
                );
            }
            json.mollow_probes = probes;
            json.oracle_truncation_population = Some(top);
        }
        Err(e) => json.oracle_error = Some(e.to_string()),
    }

    let text = serde_json::to_string_pretty(&json)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    write_file(&out.join("compare.json"), &text)?;
    println!("wrote {}", out.join("compare.json").display());
    Ok(())
}

pub fn run_selftest(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params();
    let mut failures = 0usize;
    let mut check = |name: &str, outcome: Result<String, String>| {
        match outcome {
            Ok(detail) => println!("selftest: {name} ... PASS ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("selftest: {name} ... FAIL ({detail})");
            }
        };
    };

    // detuning-sign audit
    let audit = detuning_sign_audit(&params).map_err(core_err)?;
    check(
        "detuning sign audit",
        if audit.cooling_convention == Some(DetuningSign::GroundPlusDelta)
            && audit.spectra_conjugate_symmetric
            && audit.closed_form_rel_dev < 1e-9
        {
            Ok(format!(
                "cooling under +delta convention, dual-route dev {:.2e}",
                audit.closed_form_rel_dev
            ))
        } else {
            Err(format!("{audit:?}"))
        },
    );

    let exp = build_expansion(&params).map_err(core_err)?;
    let coeffs = phonon_coefficients(&exp).map_err(core_err)?;

    // dual route for f(lambda_E)
    let mut worst_f = 0.0f64;
    for lam_e in [C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
        let closed = f_closed_form(&params, lam_e);
        let traced = f_trace_formula(&exp, lam_e).map_err(core_err)?;
        worst_f = worst_f.max((closed - traced).norm() / closed.norm().max(f64::MIN_POSITIVE));
    }
    check(
        "f(lambda_E) closed form vs trace formula",
        if worst_f < 1e-9 {
            Ok(format!("max relative deviation {worst_f:.2e}"))
        } else {
            Err(format!("max relative deviation {worst_f:.2e}"))
        },
    );

    // sideband weights against the closed Lorentzian form
    let sb = sideband_closed_form(&params, &coeffs).map_err(core_err)?;
    let terms = g_weights(&exp, &coeffs).map_err(core_err)?;
    let expect = sb.s0 * sb.half_width;
    let mut worst_w = 0.0f64;
    let mut heights = Vec::new();
    for t in terms
        .iter()
        .filter(|t| t.component == SpectralComponent::Sideband)
    {
        worst_w = worst_w.max((t.weight.re - expect).abs() / expect);
        heights.push(t.weight.re / sb.half_width);
    }
    check(
        "sideband weights vs closed form",
        if worst_w < 1e-8 && heights.len() == 2 {
            Ok(format!("max relative deviation {worst_w:.2e}"))
        } else {
            Err(format!("max relative deviation {worst_w:.2e}"))
        },
    );
    check(
        "equal sideband heights",
        if heights.len() == 2 && (heights[0] - heights[1]).abs() < 1e-8 * sb.s0 {
            Ok(format!("|h+ - h-| = {:.2e}", (heights[0] - heights[1]).abs()))
        } else {
            Err(format!("heights {heights:?}"))
        },
    );

    // detailed balance
    let db = (coeffs.n_bar / (1.0 + coeffs.n_bar) - coeffs.a_plus / coeffs.a_minus).abs();
    check(
        "detailed balance",
        if db < 1e-12 {
            Ok(format!("residual {db:.2e}"))
        } else {
            Err(format!("residual {db:.2e}"))
        },
    );

    // effective phonon eigensystem
    let modes = phonon_effective_eigensystem(&coeffs, 30, &[(0, 0), (0, 1), (0, -1), (1, 0)])
        .map_err(core_err)?;
    let mut worst_m = 0.0f64;
    for m in &modes {
        let target = C64::new(
            -(2.0 * m.big_n as f64 + m.ell.unsigned_abs() as f64) * coeffs.gamma_s,
            -(m.ell as f64) * coeffs.nu_bar,
        );
        worst_m = worst_m.max((m.lambda2 - target).norm());
    }
    check(
        "effective phonon eigenvalues",
        if worst_m < 1e-8 {
            Ok(format!("max |lambda2 - closed form| = {worst_m:.2e}"))
        } else {
            Err(format!("max |lambda2 - closed form| = {worst_m:.2e}"))
        },
    );

    // vanishing-order property suite
    let report = vanishing_order_checks(&exp).map_err(core_err)?;
    check(
        "vanishing-order trace terms and angle/pattern invariance",
        if report.passed {
            Ok(format!(
                "max trace {:.2e}, psi dev {:.2e}, beta dev {:.2e}",
                report
                    .second_order_terms_max
                    .iter()
                    .cloned()
                    .fold(report.s0_terms_max.max(report.s1_terms_max), f64::max),
                report.psi_shift_max_rel,
                report.beta_swap_max_rel
            ))
        } else {
            Err(format!("{report:?}"))
        },
    );

    std::io::stdout().flush().ok();
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "{failures} selftest check(s) failed"
        )))
    }
}

pub fn ensure_out_dir(out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}
