//! `analyze`: norms, reduced equation, roots and solution data.

use nlod_core::kernel::positivity_screen;
use nlod_core::reduction::{build_reduced, solve_roots, Root};
use nlod_core::{ProblemInstance, ReducedEquation, SolutionStructure};
use serde::Serialize;

use super::InstanceSummary;
use crate::config::{OutputFormat, RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::{csv_string, sig17, sig6, to_json, Table};

const SCREEN_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootRow {
    pub s: f64,
    pub amplitude: f64,
    pub boundary_constant: f64,
    pub residual: f64,
    pub bracket: [f64; 2],
}

impl From<&Root> for RootRow {
    fn from(r: &Root) -> Self {
        Self {
            s: r.s,
            amplitude: r.amplitude,
            boundary_constant: r.boundary_constant,
            residual: r.residual,
            bracket: [r.bracket.0, r.bracket.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityFailureRow {
    pub s: f64,
    pub t: f64,
    pub value: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivitySummary {
    pub passed: bool,
    pub samples: usize,
    pub failure: Option<PositivityFailureRow>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub instance: InstanceSummary,
    pub norm_u: f64,
    pub norm_grad: f64,
    pub rho: f64,
    pub coefficient: f64,
    pub target: f64,
    pub s_range: [f64; 2],
    pub grid: usize,
    pub count: usize,
    pub count_is_lower_bound: bool,
    pub roots: Vec<RootRow>,
    pub tangential: Vec<RootRow>,
    pub total_with_tangential: usize,
    pub rejected_brackets: Vec<[f64; 2]>,
    pub warnings: Vec<String>,
    pub positivity: PositivitySummary,
}

/// Everything `analyze` computes; reused by `verify` and `plot-data`.
pub struct Analysis {
    pub instance: ProblemInstance,
    pub equation: ReducedEquation,
    pub structure: SolutionStructure,
    pub report: AnalyzeReport,
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis, CliError> {
    let instance = cfg.instance()?;
    let equation = build_reduced(&instance)?;
    let scan = cfg.scan_config();
    let structure = solve_roots(&equation, &scan)?;

    let (lo, hi) = structure.s_range;
    let screen = positivity_screen(
        &instance.kernel,
        (lo, hi),
        (equation.rho * lo, equation.rho * hi),
        SCREEN_SAMPLES,
    )?;
    let positivity = PositivitySummary {
        passed: screen.passed,
        samples: screen.samples,
        failure: screen.failure.map(|f| PositivityFailureRow {
            s: f.s,
            t: f.t,
            value: f.value,
            reason: f.reason,
        }),
        note: screen.note.to_string(),
    };

    let report = AnalyzeReport {
        schema_version: SCHEMA_VERSION,
        command: "analyze",
        instance: InstanceSummary::new(cfg, instance.kernel.to_string()),
        norm_u: equation.norm_u,
        norm_grad: equation.norm_grad,
        rho: equation.rho,
        coefficient: equation.coefficient,
        target: equation.target,
        s_range: [lo, hi],
        grid: scan.grid,
        count: structure.count,
        count_is_lower_bound: structure.count_is_lower_bound,
        roots: structure.roots.iter().map(RootRow::from).collect(),
        tangential: structure.tangential.iter().map(RootRow::from).collect(),
        total_with_tangential: structure.total_with_tangential(),
        rejected_brackets: structure
            .rejected_brackets
            .iter()
            .map(|b| [b.0, b.1])
            .collect(),
        warnings: structure.warnings.clone(),
        positivity,
    };
    Ok(Analysis {
        instance,
        equation,
        structure,
        report,
    })
}

pub fn render(report: &AnalyzeReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = report
                .roots
                .iter()
                .map(|r| ("root", r))
                .chain(report.tangential.iter().map(|r| ("tangential", r)))
                .map(|(kind, r)| {
                    vec![
                        kind.to_string(),
                        sig17(r.s),
                        sig17(r.amplitude),
                        sig17(r.boundary_constant),
                        sig17(r.residual),
                        sig17(r.bracket[0]),
                        sig17(r.bracket[1]),
                    ]
                })
                .collect();
            csv_string(
                &[
                    "kind",
                    "s",
                    "amplitude",
                    "boundary_constant",
                    "residual",
                    "bracket_lo",
                    "bracket_hi",
                ],
                &rows,
            )
        }
        OutputFormat::Table => render_table(report),
    }
}

fn render_table(r: &AnalyzeReport) -> String {
    let mut out = String::new();
    let mut summary = Table::new(["quantity", "value"]);
    summary.row(["instance".to_string(), r.instance.describe()]);
    summary.row(["kernel M(s, t)".to_string(), r.instance.kernel.clone()]);
    summary.row(["||U||_p".to_string(), sig6(r.norm_u)]);
    summary.row(["||grad U||_q".to_string(), sig6(r.norm_grad)]);
    summary.row(["rho".to_string(), sig6(r.rho)]);
    summary.row(["C(N, k)".to_string(), sig6(r.coefficient)]);
    summary.row(["target".to_string(), sig6(r.target)]);
    summary.row([
        "scan".to_string(),
        format!(
            "s in [{}, {}], {} log-spaced points",
            sig6(r.s_range[0]),
            sig6(r.s_range[1]),
            r.grid
        ),
    ]);
    out += &summary.render();

    out += "\n";
    let mut roots = Table::new(["#", "kind", "s*", "amplitude", "c", "residual"]);
    for (i, (kind, row)) in r
        .roots
        .iter()
        .map(|x| ("root", x))
        .chain(r.tangential.iter().map(|x| ("tangential", x)))
        .enumerate()
    {
        roots.row([
            (i + 1).to_string(),
            kind.to_string(),
            sig6(row.s),
            sig6(row.amplitude),
            sig6(row.boundary_constant),
            sig6(row.residual),
        ]);
    }
    out += &roots.render();
    let bound = if r.count_is_lower_bound {
        " (lower bound)"
    } else {
        ""
    };
    out += &format!("\nsolutions: {}{bound}\n", r.count);
    if !r.tangential.is_empty() {
        out += &format!(
            "suspected tangential roots: {} (not counted; {} including them)\n",
            r.tangential.len(),
            r.total_with_tangential
        );
    }
    for w in &r.warnings {
        out += &format!("warning: {w}\n");
    }
    if let Some(f) = &r.positivity.failure {
        out += &format!(
            "warning: kernel not positive at s = {}, t = {}: {}\n",
            sig6(f.s),
            sig6(f.t),
            f.reason
        );
    }
    out
}
