//! `plot-data`: the curve `g(s)` and the target line as CSV.

use std::path::Path;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{csv_string, sig17};

use super::analyze::analyze;

pub const HEADER: [&str; 4] = ["s", "g", "target", "is_root"];

/// `is_root` column values.
pub const NOT_ROOT: &str = "0";
pub const ROOT: &str = "1";
pub const TANGENTIAL_ROOT: &str = "2";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub csv: String,
    pub rows: usize,
    pub roots: usize,
}

/// Grid rows over the scan range with root rows merged in order of `s`.
pub fn build(cfg: &RunConfig) -> Result<PlotData, CliError> {
    let analysis = analyze(cfg)?;
    let eq = &analysis.equation;
    let st = &analysis.structure;
    let mut points: Vec<(f64, &str)> = cfg
        .scan_config()
        .grid_points(eq)
        .into_iter()
        .map(|s| (s, NOT_ROOT))
        .collect();
    points.extend(st.roots.iter().map(|r| (r.s, ROOT)));
    points.extend(st.tangential.iter().map(|r| (r.s, TANGENTIAL_ROOT)));
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let target = sig17(eq.target);
    let rows = points
        .iter()
        .map(|&(s, flag)| {
            Ok(vec![
                sig17(s),
                sig17(eq.g(s)?),
                target.clone(),
                flag.to_string(),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(PlotData {
        csv: csv_string(&HEADER, &rows),
        rows: rows.len(),
        roots: st.total_with_tangential(),
    })
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let data = build(cfg)?;
    std::fs::write(out, &data.csv).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    Ok(format!(
        "wrote {} rows ({} roots) to {}\n",
        data.rows,
        data.roots,
        out.display()
    ))
}
