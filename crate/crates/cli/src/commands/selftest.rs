//! `selftest`: a handful of instances with exactly known answers.

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{sig6, Table};

use super::{analyze, norms, verify};

struct Check {
    name: &'static str,
    value: f64,
    expected: f64,
    tolerance: f64,
}

const CONSTANT_BALL: &str = r#"
schema_version = 1
k = 1
p = 2
q = 2
lambda = 3.0
kernel = "1"
[geometry]
type = "ball"
N = 2
R = 1.0
"#;

const CONSTANT_EXTERIOR: &str = r#"
schema_version = 1
k = 1
p = "inf"
q = 1
lambda = 2.0
kernel = "1"
[geometry]
type = "exterior"
N = 2
"#;

const THREE_ROOTS: &str = r#"
schema_version = 1
k = 1
p = "inf"
q = 2
lambda = 3.0
kernel = "(s-2)^2 + 0.1"
[geometry]
type = "ball"
N = 2
"#;

fn bool_check(name: &'static str, ok: bool) -> Check {
    Check {
        name,
        value: if ok { 1.0 } else { 0.0 },
        expected: 1.0,
        tolerance: 0.0,
    }
}

pub fn run() -> Result<(String, bool), CliError> {
    let mut checks = Vec::new();

    let ball = analyze::analyze(&RunConfig::from_toml(CONSTANT_BALL)?)?.report;
    checks.push(Check {
        name: "M = 1 ball: solution count",
        value: ball.count as f64,
        expected: 1.0,
        tolerance: 0.0,
    });
    checks.push(Check {
        name: "M = 1 ball: c = lambda R / N",
        value: ball.roots.first().map_or(f64::NAN, |r| r.boundary_constant),
        expected: 1.5,
        tolerance: 1e-10,
    });

    let ext = analyze::analyze(&RunConfig::from_toml(CONSTANT_EXTERIOR)?)?.report;
    checks.push(Check {
        name: "M = 1 exterior N = 2: c = lambda / N",
        value: ext.roots.first().map_or(f64::NAN, |r| r.boundary_constant),
        expected: 1.0,
        tolerance: 1e-10,
    });

    let multi_cfg = RunConfig::from_toml(THREE_ROOTS)?;
    let multi = analyze::analyze(&multi_cfg)?.report;
    checks.push(Check {
        name: "(s-2)^2 + 0.1 at lambda = 3: solution count",
        value: multi.count as f64,
        expected: 3.0,
        tolerance: 0.0,
    });
    checks.push(bool_check(
        "(s-2)^2 + 0.1: every solution verifies",
        verify::run(&multi_cfg)?.passed,
    ));
    checks.push(bool_check(
        "exterior N = 2: Kelvin checks pass",
        verify::run(&RunConfig::from_toml(CONSTANT_EXTERIOR)?)?
            .solutions
            .iter()
            .all(|s| s.kelvin.as_ref().is_some_and(|k| k.passed)),
    ));
    let q1 = norms::norm_row(
        &nlod_core::Geometry::Exterior(nlod_core::ExteriorGeometry::new(2)?),
        norms::Quantity::GradU,
        nlod_core::NormExponent::Finite(1.0),
        "selftest",
    )?;
    checks.push(Check {
        name: "exterior N = 2, q = 1: ||grad U|| = 2 pi",
        value: q1.oracle,
        expected: 2.0 * std::f64::consts::PI,
        tolerance: 1e-8,
    });

    let mut table = Table::new(["check", "value", "expected", "result"]);
    let mut all = true;
    for c in &checks {
        let ok = (c.value - c.expected).abs() <= c.tolerance * c.expected.abs().max(1.0);
        all &= ok;
        table.row([
            c.name.to_string(),
            sig6(c.value),
            sig6(c.expected),
            (if ok { "ok" } else { "FAIL" }).to_string(),
        ]);
    }
    let mut out = table.render();
    out += &format!("\nselftest: {}\n", if all { "passed" } else { "FAILED" });
    Ok((out, all))
}
