//! One module per subcommand. Each returns a serializable report plus a
//! renderer for the three output formats.

pub mod analyze;
pub mod norms;
pub mod plot;
pub mod selftest;
pub mod verify;

use serde::Serialize;

use crate::config::{ExponentSpec, GeometrySpec, RunConfig};

/// Echo of the instance in every structured report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub geometry: GeometrySpec,
    pub k: usize,
    pub p: ExponentSpec,
    pub q: ExponentSpec,
    pub lambda: f64,
    /// Canonical form of the kernel.
    pub kernel: String,
    pub seed: u64,
}

impl InstanceSummary {
    pub fn new(cfg: &RunConfig, canonical_kernel: String) -> Self {
        Self {
            geometry: cfg.geometry.clone(),
            k: cfg.k,
            p: cfg.p,
            q: cfg.q,
            lambda: cfg.lambda,
            kernel: canonical_kernel,
            seed: cfg.seed,
        }
    }

    pub fn describe(&self) -> String {
        let geom = match &self.geometry {
            GeometrySpec::Ball { n, radius, center } => {
                let c = center
                    .as_ref()
                    .map(|c| {
                        format!(
                            " center=({})",
                            c.iter()
                                .map(|v| v.to_string())
                                .collect::<Vec<_>>()
                                .join(", ")
                        )
                    })
                    .unwrap_or_default();
                format!("ball N={n} R={radius}{c}")
            }
            GeometrySpec::Exterior { n } => format!("exterior of unit ball, N={n}"),
        };
        format!(
            "{geom}, k={}, p={}, q={}, lambda={}",
            self.k, self.p, self.q, self.lambda
        )
    }
}
