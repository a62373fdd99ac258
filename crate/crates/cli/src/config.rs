//! Run configuration, stored as TOML.
//!
//! ```toml
//! schema_version = 1
//! k = 1
//! p = 2          # number or "inf"
//! q = "inf"
//! lambda = 3.0
//! kernel = "(s-2)^2 + 0.1"
//! seed = 0
//! output = "table"   # table | json | csv
//!
//! [geometry]
//! type = "ball"      # or "exterior" (unit ball complement, R ignored)
//! N = 2
//! R = 1.0
//! center = [0.0, 0.0]
//!
//! [scan]
//! s_min = 1e-8
//! grid = 10000
//! ```

use std::fmt;
use std::path::Path;

use nlod_core::kernel::parse_kernel;
use nlod_core::quadrature::QuadConfig;
use nlod_core::verifier::VerifyConfig;
use nlod_core::{
    BallGeometry, ExteriorGeometry, Geometry, NormExponent, ProblemInstance, ScanConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A norm exponent as written in a config: a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Number(f64),
    Word(InfWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfWord {
    #[serde(rename = "inf", alias = "infinity", alias = "Infinity")]
    Inf,
}

impl ExponentSpec {
    pub fn to_exponent(self) -> Result<NormExponent, CliError> {
        match self {
            Self::Word(InfWord::Inf) => Ok(NormExponent::Infinity),
            Self::Number(v) => NormExponent::finite(v).map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

impl From<NormExponent> for ExponentSpec {
    fn from(e: NormExponent) -> Self {
        match e {
            NormExponent::Infinity => Self::Word(InfWord::Inf),
            NormExponent::Finite(v) => Self::Number(v),
        }
    }
}

impl fmt::Display for ExponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Number(v) => write!(f, "{v}"),
            Self::Word(_) => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GeometrySpec {
    Ball {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "R", default = "one")]
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Exterior {
        #[serde(rename = "N")]
        n: usize,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSpec {
    pub s_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    pub grid: usize,
    pub tol: f64,
    pub tol_s: f64,
    pub tangency: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        let d = ScanConfig::default();
        Self {
            s_min: d.s_min,
            s_max: d.s_max,
            grid: d.grid,
            tol: d.tol,
            tol_s: d.tol_s,
            tangency: d.tangency_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    /// Relative change applied to every amplitude before checking; nonzero
    /// values are expected to fail.
    pub amplitude_perturbation: f64,
    pub interior_samples: usize,
    pub boundary_samples: usize,
    pub r_check: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        let d = VerifyConfig::default();
        Self {
            amplitude_perturbation: 0.0,
            interior_samples: d.interior_samples,
            boundary_samples: d.boundary_samples,
            r_check: d.r_check,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub geometry: GeometrySpec,
    pub k: usize,
    pub p: ExponentSpec,
    pub q: ExponentSpec,
    pub lambda: f64,
    pub kernel: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputFormat,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Structural checks; exponent admissibility is a domain question and is
    /// left to [`RunConfig::instance`].
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let n = match &self.geometry {
            GeometrySpec::Ball { n, radius, center } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                if let Some(c) = center {
                    if c.len() != *n {
                        return bad(format!("center has {} coordinates but N = {n}", c.len()));
                    }
                }
                if !(1..=*n).contains(&self.k) {
                    return bad(format!("k must lie in 1..={n}, got {}", self.k));
                }
                *n
            }
            GeometrySpec::Exterior { n } => {
                if self.k != 1 {
                    return bad(format!("exterior problems require k = 1, got {}", self.k));
                }
                *n
            }
        };
        if n < 2 {
            return bad(format!("N must be at least 2, got {n}"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        self.p.to_exponent()?;
        self.q.to_exponent()?;
        self.scan_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let v = &self.verify;
        if !(v.amplitude_perturbation.is_finite() && v.amplitude_perturbation > -1.0) {
            return bad("verify.amplitude_perturbation must be finite and above -1".into());
        }
        if v.interior_samples == 0 || v.r_check.is_nan() || v.r_check <= 1.0 {
            return bad("verify needs interior_samples >= 1 and r_check > 1".into());
        }
        parse_kernel(&self.kernel)?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry, CliError> {
        let g = match &self.geometry {
            GeometrySpec::Ball { n, radius, center } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; *n]);
                Geometry::Ball(
                    BallGeometry::new(*n, *radius, c)
                        .map_err(|e| CliError::Config(e.to_string()))?,
                )
            }
            GeometrySpec::Exterior { n } => Geometry::Exterior(
                ExteriorGeometry::new(*n).map_err(|e| CliError::Config(e.to_string()))?,
            ),
        };
        Ok(g)
    }

    pub fn instance(&self) -> Result<ProblemInstance, CliError> {
        self.validate()?;
        Ok(ProblemInstance::new(
            self.geometry()?,
            self.k,
            self.p.to_exponent()?,
            self.q.to_exponent()?,
            self.lambda,
            parse_kernel(&self.kernel)?,
        )?)
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            s_min: self.scan.s_min,
            s_max: self.scan.s_max,
            grid: self.scan.grid,
            tol: self.scan.tol,
            tol_s: self.scan.tol_s,
            tangency_threshold: self.scan.tangency,
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            interior_samples: self.verify.interior_samples,
            boundary_samples: self.verify.boundary_samples,
            seed: self.seed,
            r_check: self.verify.r_check,
            quad: QuadConfig::with_rel_tol(1e-12),
        }
    }
}
