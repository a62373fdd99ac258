//! `norms`: closed-form norms of the base solution against a quadrature or
//! maximization oracle.

use nlod_core::base::{interior_peak_grad_u_ext, printed_norm_u_ext_inf};
use nlod_core::quadrature::QuadConfig;
use nlod_core::{BallGeometry, ExteriorGeometry, Geometry, NormExponent};
use serde::Serialize;

use crate::config::{ExponentSpec, OutputFormat, RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::{csv_string, sig17, sig6, to_json, Table};

pub const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    U,
    GradU,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub geometry: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    pub quantity: Quantity,
    pub exponent: ExponentSpec,
    pub formula: &'static str,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_err: f64,
    /// The commonly printed sup-norm expression, where it differs from the
    /// true value.
    pub printed: Option<f64>,
    pub printed_rel_err: Option<f64>,
    pub origin: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormsReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub rows: Vec<NormRow>,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Lower limit of admissible exponents (exclusive) for the exterior base
/// solution, or `None` when only `inf` is admissible.
fn exterior_threshold(n: usize, quantity: Quantity) -> Option<f64> {
    let nf = n as f64;
    match (quantity, n) {
        (Quantity::U, 2) => None,
        (Quantity::U, _) => Some(nf / (nf - 2.0)),
        (Quantity::GradU, 2) => Some(2.0 / 3.0),
        (Quantity::GradU, _) => Some(nf / (nf - 1.0)),
    }
}

/// Six admissible exponents, `inf` included, for one dimension and quantity.
pub fn standard_exponents(exterior: bool, n: usize, quantity: Quantity) -> Vec<NormExponent> {
    let finite: Vec<f64> = if exterior {
        match exterior_threshold(n, quantity) {
            None => vec![],
            Some(lo) => [1.1, 1.5, 2.0, 3.0, 5.0]
                .iter()
                .map(|m| (lo * m * 1e4).round() / 1e4)
                .collect(),
        }
    } else {
        vec![1.0, 1.5, 2.0, 3.7, 10.0]
    };
    finite
        .into_iter()
        .map(NormExponent::Finite)
        .chain(std::iter::once(NormExponent::Infinity))
        .collect()
}

fn formula(g: &Geometry, quantity: Quantity, e: NormExponent) -> &'static str {
    match (g.is_exterior(), quantity, e.is_infinite(), g.dim()) {
        (_, _, true, _) => "supremum",
        (false, Quantity::U, false, _) => "beta",
        (false, Quantity::GradU, false, _) => "power",
        (true, Quantity::U, false, _) => "beta",
        (true, Quantity::GradU, false, 2) => "2pi/(3q-2)",
        (true, Quantity::GradU, false, _) => "beta + incomplete beta",
    }
}

pub fn norm_row(
    g: &Geometry,
    quantity: Quantity,
    e: NormExponent,
    origin: &'static str,
) -> Result<NormRow, CliError> {
    let quad = QuadConfig::with_rel_tol(1e-12);
    let (closed_form, oracle) = match quantity {
        Quantity::U => (g.norm_u(e)?, g.norm_u_quadrature(1.0, e, &quad)?),
        Quantity::GradU => (g.norm_grad(e)?, g.norm_grad_quadrature(1.0, e, &quad)?),
    };
    let n = g.dim();
    let printed = match (g.is_exterior() && e.is_infinite() && n >= 3, quantity) {
        (true, Quantity::U) => Some(printed_norm_u_ext_inf(n)),
        (true, Quantity::GradU) => Some(interior_peak_grad_u_ext(n)),
        (false, _) => None,
    };
    let rel = |v: f64| (v - oracle).abs() / oracle.abs();
    Ok(NormRow {
        geometry: if g.is_exterior() { "exterior" } else { "ball" },
        n,
        quantity,
        exponent: e.into(),
        formula: formula(g, quantity, e),
        closed_form,
        oracle,
        rel_err: rel(closed_form),
        printed,
        printed_rel_err: printed.map(rel),
        origin,
    })
}

/// Rows for every dimension `2..=5` and the standard exponents.
pub fn standard_rows(exterior: bool, radius: f64) -> Result<Vec<NormRow>, CliError> {
    let mut rows = Vec::new();
    for n in 2..=5 {
        let g = if exterior {
            Geometry::Exterior(ExteriorGeometry::new(n)?)
        } else {
            Geometry::Ball(BallGeometry::centered(n, radius)?)
        };
        for quantity in [Quantity::U, Quantity::GradU] {
            for e in standard_exponents(exterior, n, quantity) {
                rows.push(norm_row(&g, quantity, e, "grid")?);
            }
        }
    }
    Ok(rows)
}

pub fn run(cfg: &RunConfig) -> Result<NormsReport, CliError> {
    let inst = cfg.instance()?;
    let g = &inst.geometry;
    let mut rows = vec![
        norm_row(g, Quantity::U, inst.p, "instance")?,
        norm_row(g, Quantity::GradU, inst.q, "instance")?,
    ];
    let radius = if g.is_exterior() {
        1.0
    } else {
        g.boundary_radius()
    };
    rows.extend(standard_rows(g.is_exterior(), radius)?);
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(NormsReport {
        schema_version: SCHEMA_VERSION,
        command: "norms",
        rows,
        max_rel_err,
        tolerance: TOLERANCE,
        passed: max_rel_err <= TOLERANCE,
    })
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::U => "||U||_p",
        Quantity::GradU => "||grad U||_q",
    }
}

pub fn render(report: &NormsReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => {
            let opt = |v: Option<f64>| v.map(sig17).unwrap_or_default();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.origin.to_string(),
                        r.geometry.to_string(),
                        r.n.to_string(),
                        quantity_name(r.quantity).to_string(),
                        r.exponent.to_string(),
                        r.formula.to_string(),
                        sig17(r.closed_form),
                        sig17(r.oracle),
                        sig17(r.rel_err),
                        opt(r.printed),
                        opt(r.printed_rel_err),
                    ]
                })
                .collect();
            csv_string(
                &[
                    "origin",
                    "geometry",
                    "N",
                    "quantity",
                    "exponent",
                    "formula",
                    "closed_form",
                    "oracle",
                    "rel_err",
                    "printed",
                    "printed_rel_err",
                ],
                &rows,
            )
        }
        OutputFormat::Table => {
            let mut t = Table::new([
                "origin",
                "geometry",
                "N",
                "norm",
                "exp",
                "formula",
                "closed form",
                "oracle",
                "rel err",
                "printed",
                "printed rel err",
            ]);
            for r in &report.rows {
                t.row([
                    r.origin.to_string(),
                    r.geometry.to_string(),
                    r.n.to_string(),
                    quantity_name(r.quantity).to_string(),
                    r.exponent.to_string(),
                    r.formula.to_string(),
                    sig6(r.closed_form),
                    sig6(r.oracle),
                    sig6(r.rel_err),
                    r.printed.map(sig6).unwrap_or_default(),
                    r.printed_rel_err.map(sig6).unwrap_or_default(),
                ]);
            }
            let mut out = t.render();
            out += &format!(
                "\nmax rel err {} (tolerance {}): {}\n",
                sig6(report.max_rel_err),
                sig6(report.tolerance),
                if report.passed { "ok" } else { "FAIL" }
            );
            if report.rows.iter().any(|r| r.printed.is_some()) {
                out += "printed: the widely quoted sup-norm expressions for N >= 3; they disagree with the \
                        supremum found by direct maximization and are shown for reference only\n";
            }
            out
        }
    }
}
