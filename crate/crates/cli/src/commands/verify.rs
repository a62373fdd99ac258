//! `verify`: close the loop from roots back to the nonlocal PDE.

use nlod_core::reduction::roots_to_solutions;
use nlod_core::verifier::{
    gamma_scaling_check, kelvin_checks, verify, GammaReport, KelvinReport, ResidualReport,
};
use serde::Serialize;

use super::analyze::analyze;
use super::InstanceSummary;
use crate::config::{OutputFormat, RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::{csv_string, sig17, sig6, to_json, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub interior_residual: f64,
    pub boundary_value: f64,
    pub boundary_gradient: f64,
    pub gamma_scaling: f64,
    pub kelvin_closed_form: f64,
    pub kelvin_laplacian: f64,
    pub kelvin_boundary_identity: f64,
    pub kelvin_orthogonality: f64,
    pub kelvin_involution: f64,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    interior_residual: 1e-6,
    boundary_value: 1e-10,
    boundary_gradient: 1e-8,
    gamma_scaling: 1e-6,
    kelvin_closed_form: 1e-10,
    kelvin_laplacian: 1e-8,
    kelvin_boundary_identity: 1e-8,
    kelvin_orthogonality: 1e-10,
    kelvin_involution: 1e-10,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySummary {
    pub radius: f64,
    pub value: f64,
    pub limit: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub max_interior_residual: f64,
    pub boundary_value_max: f64,
    pub boundary_gradient_deviation: f64,
    pub c_reported: f64,
    pub sample_count: usize,
    pub boundary_sample_count: usize,
    pub norm_u_quadrature: f64,
    pub norm_grad_quadrature: f64,
    pub kernel_value: f64,
    pub decay: Option<DecaySummary>,
}

impl From<&ResidualReport> for ResidualSummary {
    fn from(r: &ResidualReport) -> Self {
        Self {
            max_interior_residual: r.max_interior_residual,
            boundary_value_max: r.boundary_value_max,
            boundary_gradient_deviation: r.boundary_gradient_deviation,
            c_reported: r.c_reported,
            sample_count: r.sample_count,
            boundary_sample_count: r.boundary_sample_count,
            norm_u_quadrature: r.norm_u,
            norm_grad_quadrature: r.norm_grad,
            kernel_value: r.kernel_value,
            decay: r.decay.map(|d| DecaySummary {
                radius: d.radius,
                value: d.value,
                limit: d.limit,
                deviation: d.deviation,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaSummary {
    pub gamma: f64,
    pub gamma_amplitude: f64,
    pub max_deviation: f64,
    pub samples: usize,
}

impl From<&GammaReport> for GammaSummary {
    fn from(g: &GammaReport) -> Self {
        Self {
            gamma: g.gamma,
            gamma_amplitude: g.gamma_amplitude,
            max_deviation: g.max_deviation,
            samples: g.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KelvinSummary {
    pub closed_form_deviation: f64,
    pub laplacian_deviation: f64,
    pub base_boundary_gradient: f64,
    pub laplacian_identity: f64,
    pub radial_boundary_identity: f64,
    pub involution: f64,
    pub orthogonality: f64,
    pub pythagoras: f64,
    pub reconstruction: f64,
    pub boundary_identity: f64,
    pub reflection: f64,
    pub removability_ratios: Vec<[f64; 2]>,
    pub removability_monotone: bool,
    pub removability_note: String,
    pub passed: bool,
}

impl From<&KelvinReport> for KelvinSummary {
    fn from(k: &KelvinReport) -> Self {
        let t = THRESHOLDS;
        let d = &k.decomposition;
        let passed = k.base.closed_form_deviation <= t.kelvin_closed_form
            && k.base.laplacian_deviation <= t.kelvin_laplacian
            && k.laplacian_identity <= t.kelvin_laplacian
            && k.radial_boundary_identity <= t.kelvin_boundary_identity
            && d.boundary_identity <= t.kelvin_boundary_identity
            && d.reflection <= t.kelvin_boundary_identity
            && d.orthogonality <= t.kelvin_orthogonality
            && d.pythagoras <= t.kelvin_orthogonality
            && k.involution <= t.kelvin_involution
            && k.removability.monotone_decreasing;
        Self {
            closed_form_deviation: k.base.closed_form_deviation,
            laplacian_deviation: k.base.laplacian_deviation,
            base_boundary_gradient: k.base.boundary_gradient,
            laplacian_identity: k.laplacian_identity,
            radial_boundary_identity: k.radial_boundary_identity,
            involution: k.involution,
            orthogonality: d.orthogonality,
            pythagoras: d.pythagoras,
            reconstruction: d.reconstruction,
            boundary_identity: d.boundary_identity,
            reflection: d.reflection,
            removability_ratios: k.removability.ratios.iter().map(|&(r, q)| [r, q]).collect(),
            removability_monotone: k.removability.monotone_decreasing,
            removability_note: k.removability.note.to_string(),
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionCheck {
    pub s: f64,
    pub amplitude: f64,
    pub tangential: bool,
    /// Relative amplitude change applied before checking.
    pub perturbation: f64,
    pub residual: ResidualSummary,
    /// `|g'(s*)| |delta| s* / ||U||_p^k`, the interior residual a relative
    /// amplitude error `delta` should produce.
    pub predicted_residual: f64,
    pub gamma: GammaSummary,
    pub kelvin: Option<KelvinSummary>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub instance: InstanceSummary,
    pub count: usize,
    pub thresholds: Thresholds,
    pub solutions: Vec<SolutionCheck>,
    pub passed: bool,
}

pub fn run(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let analysis = analyze(cfg)?;
    let (inst, eq) = (&analysis.instance, &analysis.equation);
    let vcfg = cfg.verify_config();
    let delta = cfg.verify.amplitude_perturbation;
    let t = THRESHOLDS;

    let mut solutions = Vec::new();
    for sol in roots_to_solutions(eq, &analysis.structure) {
        let checked = if delta == 0.0 {
            sol.clone()
        } else {
            sol.perturbed(1.0 + delta)
        };
        let residual = verify(inst, &checked, &vcfg)?;
        let gamma = gamma_scaling_check(inst, &checked, &vcfg)?;
        let kelvin = if inst.geometry.is_exterior() {
            Some(KelvinSummary::from(&kelvin_checks(
                checked.profile(),
                inst.geometry.dim(),
                cfg.seed,
            )?))
        } else {
            None
        };
        let h = 1e-6 * sol.s;
        let slope = (eq.g(sol.s + h)? - eq.g(sol.s - h)?) / (2.0 * h);
        let predicted_residual = slope.abs() * delta.abs() * sol.s / eq.norm_u.powi(eq.k as i32);
        let passed = residual.within(t.interior_residual, t.boundary_value, t.boundary_gradient)
            && gamma.max_deviation <= t.gamma_scaling
            && kelvin.as_ref().is_none_or(|k| k.passed);
        solutions.push(SolutionCheck {
            s: sol.s,
            amplitude: checked.amplitude,
            tangential: sol.tangential,
            perturbation: delta,
            residual: ResidualSummary::from(&residual),
            predicted_residual,
            gamma: GammaSummary::from(&gamma),
            kelvin,
            passed,
        });
    }
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        instance: analysis.report.instance,
        count: analysis.structure.count,
        thresholds: t,
        passed: solutions.iter().all(|s| s.passed),
        solutions,
    })
}

pub fn render(report: &VerifyReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = report
                .solutions
                .iter()
                .map(|s| {
                    vec![
                        sig17(s.s),
                        sig17(s.amplitude),
                        s.tangential.to_string(),
                        sig17(s.residual.max_interior_residual),
                        sig17(s.predicted_residual),
                        sig17(s.residual.boundary_value_max),
                        sig17(s.residual.boundary_gradient_deviation),
                        sig17(s.gamma.max_deviation),
                        s.kelvin
                            .as_ref()
                            .map_or(String::new(), |k| k.passed.to_string()),
                        s.passed.to_string(),
                    ]
                })
                .collect();
            csv_string(
                &[
                    "s",
                    "amplitude",
                    "tangential",
                    "interior_residual",
                    "predicted_residual",
                    "boundary_value",
                    "boundary_gradient_deviation",
                    "gamma_deviation",
                    "kelvin_passed",
                    "passed",
                ],
                &rows,
            )
        }
        OutputFormat::Table => render_table(report),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn render_table(r: &VerifyReport) -> String {
    let t = &r.thresholds;
    let mut out = format!(
        "instance: {}\nkernel: {}\n\n",
        r.instance.describe(),
        r.instance.kernel
    );
    if r.solutions.is_empty() {
        out += "no solutions in the scan range; nothing to verify\n";
    }
    let mut table = Table::new([
        "#",
        "s*",
        "amplitude",
        "interior",
        "boundary u",
        "boundary grad",
        "gamma S_k",
        "result",
    ]);
    for (i, s) in r.solutions.iter().enumerate() {
        table.row([
            format!(
                "{}{}",
                i + 1,
                if s.tangential { " (tangential)" } else { "" }
            ),
            sig6(s.s),
            sig6(s.amplitude),
            sig6(s.residual.max_interior_residual),
            sig6(s.residual.boundary_value_max),
            sig6(s.residual.boundary_gradient_deviation),
            sig6(s.gamma.max_deviation),
            verdict(s.passed).to_string(),
        ]);
    }
    if !r.solutions.is_empty() {
        out += &table.render();
        out += &format!(
            "thresholds: interior {}, boundary u {}, boundary grad {}, gamma {}\n",
            sig6(t.interior_residual),
            sig6(t.boundary_value),
            sig6(t.boundary_gradient),
            sig6(t.gamma_scaling)
        );
        out += &format!(
            "norms recomputed by quadrature for solution 1: ||u||_p = {}, ||grad u||_q = {}, M = {}\n",
            sig6(r.solutions[0].residual.norm_u_quadrature),
            sig6(r.solutions[0].residual.norm_grad_quadrature),
            sig6(r.solutions[0].residual.kernel_value)
        );
    }
    for (i, s) in r.solutions.iter().enumerate() {
        if s.perturbation != 0.0 {
            out += &format!(
                "solution {}: amplitude perturbed by {}; interior residual {} vs predicted {}\n",
                i + 1,
                sig6(s.perturbation),
                sig6(s.residual.max_interior_residual),
                sig6(s.predicted_residual)
            );
        }
        if let Some(d) = &s.residual.decay {
            out += &format!(
                "solution {}: far field u({}) = {} (limit {})\n",
                i + 1,
                sig6(d.radius),
                sig6(d.value),
                sig6(d.limit)
            );
        }
    }
    for (i, s) in r.solutions.iter().enumerate() {
        let Some(k) = &s.kelvin else { continue };
        out += &format!(
            "\nKelvin transform checks, solution {}: {}\n",
            i + 1,
            verdict(k.passed)
        );
        let mut kt = Table::new(["check", "deviation", "threshold"]);
        kt.row([
            "base: psi vs (rho^2 - 1)/2".into(),
            sig6(k.closed_form_deviation),
            sig6(t.kelvin_closed_form),
        ]);
        kt.row([
            "base: Laplacian = N".into(),
            sig6(k.laplacian_deviation),
            sig6(t.kelvin_laplacian),
        ]);
        kt.row([
            "Laplacian transfer identity".into(),
            sig6(k.laplacian_identity),
            sig6(t.kelvin_laplacian),
        ]);
        kt.row([
            "radial boundary gradient identity".to_string(),
            sig6(k.radial_boundary_identity),
            sig6(t.kelvin_boundary_identity),
        ]);
        kt.row([
            "test field boundary identity".to_string(),
            sig6(k.boundary_identity),
            sig6(t.kelvin_boundary_identity),
        ]);
        kt.row([
            "test field normal reflection".to_string(),
            sig6(k.reflection),
            sig6(t.kelvin_boundary_identity),
        ]);
        kt.row([
            "a . b".to_string(),
            sig6(k.orthogonality),
            sig6(t.kelvin_orthogonality),
        ]);
        kt.row([
            "|a|^2 + |b|^2 - |grad u|^2".to_string(),
            sig6(k.pythagoras),
            sig6(t.kelvin_orthogonality),
        ]);
        kt.row([
            "double transform".to_string(),
            sig6(k.involution),
            sig6(t.kelvin_involution),
        ]);
        out += &kt.render();
        let (first, last) = (
            k.removability_ratios[0],
            k.removability_ratios[k.removability_ratios.len() - 1],
        );
        out += &format!(
            "removability ratio {} at rho = {} down to {} at rho = {}, monotone: {} ({})\n",
            sig6(first[1]),
            sig6(first[0]),
            sig6(last[1]),
            sig6(last[0]),
            k.removability_monotone,
            k.removability_note
        );
    }
    out += &format!(
        "\nverification: {}\n",
        if r.passed { "passed" } else { "FAILED" }
    );
    out
}
