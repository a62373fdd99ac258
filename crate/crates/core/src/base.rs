//! The explicit base solutions and their norms.
//!
//! * ball: `U_{R,x0}(x) = (|x - x0|^2 - R^2) / 2` on `B_R(x0)`, solving
//!   `S_k(D^2 U) = C(N, k)` with `|grad U| = R` on the boundary;
//! * exterior: `U(x) = (|x|^{-N} - |x|^{2-N}) / 2` on `|x| > 1`, solving
//!   `Delta U = N |x|^{-N-2}` with `|grad U| = 1` on the unit sphere.
//!
//! Every norm has a closed form and an independent quadrature route
//! ([`norm_quadrature`]) that integrates `|S^{N-1}| int |f(r)|^p r^{N-1} dr`
//! numerically, or maximizes `|f|` for `p = inf`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::{distance, norm, RadialProfile};
use crate::quadrature::{integrate_with_breaks, maximize_on_grid, QuadConfig};
use crate::specialfun::{incomplete_beta, log_beta, sphere_area};

/// A Lebesgue exponent in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn finite(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self::Finite(value))
        } else {
            Err(Error::domain(format!(
                "norm exponent must lie in (0, inf], got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(v) => v,
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for NormExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Self::Infinity);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::domain(format!("cannot parse norm exponent `{s}`")))?;
        if v == f64::INFINITY {
            Ok(Self::Infinity)
        } else {
            Self::finite(v)
        }
    }
}

/// The ball `B_R(x0)` in `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGeometry {
    n: usize,
    radius: f64,
    center: Vec<f64>,
}

impl BallGeometry {
    pub fn new(n: usize, radius: f64, center: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ball geometry requires N >= 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.len() != n {
            return Err(Error::domain(format!(
                "ball centre has {} coordinates, expected N = {n}",
                center.len()
            )));
        }
        Ok(Self { n, radius, center })
    }

    /// Ball of radius `radius` centred at the origin.
    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, radius, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

/// The complement of the closed unit ball in `R^N`, `N >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorGeometry {
    n: usize,
}

impl ExteriorGeometry {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "exterior geometry requires N >= 2, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

// Boundary points are produced by rescaling, so allow a few ulps of slack.
const BOUNDARY_SLACK: f64 = 1e-12;

pub fn u_ball(x: &[f64], geom: &BallGeometry) -> Result<f64> {
    let r = ball_radius_of(x, geom)?;
    Ok(0.5 * (r * r - geom.radius * geom.radius))
}

pub fn grad_u_ball(x: &[f64], geom: &BallGeometry) -> Result<Vec<f64>> {
    ball_radius_of(x, geom)?;
    Ok(x.iter().zip(&geom.center).map(|(a, b)| a - b).collect())
}

fn ball_radius_of(x: &[f64], geom: &BallGeometry) -> Result<f64> {
    if x.len() != geom.n {
        return Err(Error::domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            geom.n
        )));
    }
    let r = distance(x, &geom.center);
    if r > geom.radius * (1.0 + BOUNDARY_SLACK) {
        return Err(Error::domain(format!(
            "point at distance {r} lies outside the ball of radius {}",
            geom.radius
        )));
    }
    Ok(r)
}

pub fn u_ext(x: &[f64], geom: &ExteriorGeometry) -> Result<f64> {
    let r = exterior_radius_of(x, geom)?;
    Ok(RadialProfile::exterior_base(geom.n).value(r))
}

pub fn grad_u_ext(x: &[f64], geom: &ExteriorGeometry) -> Result<Vec<f64>> {
    exterior_radius_of(x, geom)?;
    Ok(RadialProfile::exterior_base(geom.n).field_gradient(x, &vec![0.0; geom.n]))
}

fn exterior_radius_of(x: &[f64], geom: &ExteriorGeometry) -> Result<f64> {
    if x.len() != geom.n {
        return Err(Error::domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            geom.n
        )));
    }
    let r = norm(x);
    if r < 1.0 - BOUNDARY_SLACK {
        return Err(Error::domain(format!(
            "point at |x| = {r} lies inside the unit ball"
        )));
    }
    Ok(r)
}

/// `||U_{R,x0}||_{L^p(B_R)}`. For finite `p`, substituting `r = R sqrt(t)` gives
/// `||U||_p^p = (1/2)^{p+1} |S^{N-1}| R^{2p+N} B(N/2, p+1)`.
pub fn norm_u_ball(p: NormExponent, geom: &BallGeometry) -> Result<f64> {
    let (n, r) = (geom.n as f64, geom.radius);
    match p {
        NormExponent::Infinity => Ok(0.5 * r * r),
        NormExponent::Finite(p) => {
            let log_pow = (p + 1.0) * 0.5f64.ln()
                + sphere_area(geom.n)?.ln()
                + (2.0 * p + n) * r.ln()
                + log_beta(0.5 * n, p + 1.0)?;
            Ok((log_pow / p).exp())
        }
    }
}

/// `||grad U_{R,x0}||_{L^q(B_R)}`, with `||grad U||_q^q = |S^{N-1}| R^{q+N} / (q+N)`.
pub fn norm_grad_u_ball(q: NormExponent, geom: &BallGeometry) -> Result<f64> {
    let (n, r) = (geom.n as f64, geom.radius);
    match q {
        NormExponent::Infinity => Ok(r),
        NormExponent::Finite(q) => {
            let log_pow = sphere_area(geom.n)?.ln() + (q + n) * r.ln() - (q + n).ln();
            Ok((log_pow / q).exp())
        }
    }
}

/// Admissible exponents for `||U||_{L^p(B^c)}`: `p > N/(N-2)` for `N >= 3`, `p = inf` for `N = 2`.
pub fn check_u_ext_exponent(p: NormExponent, n: usize) -> Result<()> {
    match (p, n) {
        (NormExponent::Infinity, _) => Ok(()),
        (NormExponent::Finite(v), 2) => Err(Error::domain(format!(
            "U is not in L^{v} of the exterior domain for N = 2; only p = inf is admissible"
        ))),
        (NormExponent::Finite(v), n) => {
            let threshold = n as f64 / (n as f64 - 2.0);
            if v > threshold {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "U is not in L^{v} of the exterior domain for N = {n}; need p > {threshold}"
                )))
            }
        }
    }
}

/// Admissible exponents for `||grad U||_{L^q(B^c)}`: `q > N/(N-1)` for `N >= 3`, `q > 2/3` for `N = 2`.
pub fn check_grad_ext_exponent(q: NormExponent, n: usize) -> Result<()> {
    let threshold = if n == 2 {
        2.0 / 3.0
    } else {
        n as f64 / (n as f64 - 1.0)
    };
    match q {
        NormExponent::Infinity => Ok(()),
        NormExponent::Finite(v) if v > threshold => Ok(()),
        NormExponent::Finite(v) => Err(Error::domain(format!(
            "grad U is not in L^{v} of the exterior domain for N = {n}; need q > {threshold}"
        ))),
    }
}

/// `||U||_{L^p(B^c)}`.
///
/// Finite `p` (`N >= 3`): `||U||_p^p = (1/2)^{p+1} |S^{N-1}| B((p(N-2)-N)/2, p+1)`.
/// `p = inf`: `|U|` peaks at `r^2 = N/(N-2)`, giving
/// `(1/(N-2)) (N/(N-2))^{-N/2}` for `N >= 3`; for `N = 2` the supremum `1/2`
/// is approached as `|x| -> inf`.
pub fn norm_u_ext(p: NormExponent, geom: &ExteriorGeometry) -> Result<f64> {
    let n = geom.n;
    check_u_ext_exponent(p, n)?;
    let nf = n as f64;
    match p {
        NormExponent::Infinity if n == 2 => Ok(0.5),
        NormExponent::Infinity => Ok((nf / (nf - 2.0)).powf(-0.5 * nf) / (nf - 2.0)),
        NormExponent::Finite(p) => {
            let log_pow = (p + 1.0) * 0.5f64.ln()
                + sphere_area(n)?.ln()
                + log_beta(0.5 * (p * (nf - 2.0) - nf), p + 1.0)?;
            Ok((log_pow / p).exp())
        }
    }
}

/// `||grad U||_{L^q(B^c)}`.
///
/// Finite `q`, `N >= 3`:
/// `(1/2)^{q+1} |S^{N-1}| N^q ((N-2)/N)^{(q(N+1)-N)/2} (B((q(N-1)-N)/2, q+1) + B_{2/N}(q+1, (N-(N+1)q)/2))`.
/// Finite `q`, `N = 2`: `2 pi / (3q - 2)`.
/// `q = inf`: `|grad U| = 1` on the unit sphere and stays below 1 outside it,
/// so the supremum is 1 for every `N` (see [`interior_peak_grad_u_ext`]).
pub fn norm_grad_u_ext(q: NormExponent, geom: &ExteriorGeometry) -> Result<f64> {
    let n = geom.n;
    check_grad_ext_exponent(q, n)?;
    let nf = n as f64;
    match q {
        NormExponent::Infinity if n == 2 => Ok(1.0),
        NormExponent::Infinity => Ok(interior_peak_grad_u_ext(n).max(1.0)),
        NormExponent::Finite(q) if n == 2 => {
            Ok((2.0 * std::f64::consts::PI / (3.0 * q - 2.0)).powf(1.0 / q))
        }
        NormExponent::Finite(q) => {
            let complete = log_beta(0.5 * (q * (nf - 1.0) - nf), q + 1.0)?.exp();
            let partial = incomplete_beta(2.0 / nf, q + 1.0, 0.5 * (nf - (nf + 1.0) * q))?;
            let log_pow = (q + 1.0) * 0.5f64.ln()
                + sphere_area(n)?.ln()
                + q * nf.ln()
                + 0.5 * (q * (nf + 1.0) - nf) * ((nf - 2.0) / nf).ln()
                + (complete + partial).ln();
            Ok((log_pow / q).exp())
        }
    }
}

/// `(1/(N-2)) (N/(N-1))^{-N/2}`, the sup-norm expression for `U` as it is
/// commonly printed. It differs from the true supremum of `|U|`, which has
/// `N - 2` in place of `N - 1` inside the power; kept for side-by-side tables.
pub fn printed_norm_u_ext_inf(n: usize) -> f64 {
    let nf = n as f64;
    (nf / (nf - 1.0)).powf(-0.5 * nf) / (nf - 2.0)
}

/// `(N/(N-1)) (N(N+1)/((N-1)(N-2)))^{-(N+1)/2}` for `N >= 3`: the value of
/// `|grad U|` at its interior critical radius `r^2 = N(N+1)/((N-1)(N-2))`.
/// This is a local maximum only; the global supremum is 1, attained on the
/// unit sphere.
pub fn interior_peak_grad_u_ext(n: usize) -> f64 {
    let nf = n as f64;
    nf / (nf - 1.0) * (nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0))).powf(-0.5 * (nf + 1.0))
}

/// `|f(r)| <= coeff * r^{-decay}` for all `r >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEnvelope {
    pub coeff: f64,
    pub decay: f64,
}

/// Radial integration domain for [`norm_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialDomain {
    /// `0 <= r <= radius`.
    Ball { radius: f64 },
    /// `r >= 1`; the envelope bounds the truncated tail.
    Exterior { tail: PowerEnvelope },
}

// Where the head of an exterior integral ends and the tail-controlled part starts.
const EXTERIOR_HEAD: f64 = 8.0;
// Largest admissible log-radius for truncation.
const MAX_LOG_RADIUS: f64 = 700.0;

/// Radially symmetric norm `(|S^{N-1}| int |f(r)|^p r^{N-1} dr)^{1/p}` by
/// adaptive quadrature, or `sup |f|` by bounded maximization when `p = inf`.
///
/// Exterior integrals are carried out in the variable `ln r`, truncated at
/// the radius where the envelope's analytic tail drops below a tenth of the
/// requested relative tolerance. `breakpoints` mark kinks of `|f|`.
pub fn norm_quadrature<F: Fn(f64) -> f64>(
    f: F,
    p: NormExponent,
    n: usize,
    domain: &RadialDomain,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    let p = match p {
        NormExponent::Infinity => return Ok(sup_norm(&f, domain)),
        NormExponent::Finite(p) => p,
    };
    let area = sphere_area(n)?;
    let nf = n as f64;
    let cfg = QuadConfig {
        abs_tol: 0.0,
        ..*cfg
    };

    let integral = match *domain {
        RadialDomain::Ball { radius } => {
            let mut pts = vec![0.0];
            pts.extend(
                breakpoints
                    .iter()
                    .copied()
                    .filter(|&b| b > 0.0 && b < radius),
            );
            pts.push(radius);
            integrate_with_breaks(|r: f64| f(r).abs().powf(p) * r.powf(nf - 1.0), &pts, &cfg)?.value
        }
        RadialDomain::Exterior { tail } => {
            let excess = tail.decay * p - nf;
            if !(excess > 0.0) {
                return Err(Error::domain(format!(
                    "integrand envelope r^(-{}) is not in L^{p} of the exterior domain for N = {n}",
                    tail.decay
                )));
            }
            // integrand in the variable u = ln r
            let g = |u: f64| {
                let v = f(u.exp()).abs();
                if v == 0.0 {
                    0.0
                } else {
                    (p * v.ln() + nf * u).exp()
                }
            };
            let mut logs: Vec<f64> = breakpoints
                .iter()
                .filter(|&&b| b > 1.0 && b < EXTERIOR_HEAD)
                .map(|b| b.ln())
                .collect();
            logs.insert(0, 0.0);
            logs.push(EXTERIOR_HEAD.ln());
            let head = integrate_with_breaks(g, &logs, &cfg)?.value;

            let tail_at = |radius: f64| area * tail.coeff.powf(p) * radius.powf(-excess) / excess;
            let budget = 0.1 * cfg.rel_tol * area * head;
            let log_cut = if budget > 0.0 {
                ((area * tail.coeff.powf(p) / (excess * budget)).ln() / excess)
                    .max(EXTERIOR_HEAD.ln())
            } else {
                EXTERIOR_HEAD.ln()
            };
            if log_cut > MAX_LOG_RADIUS {
                return Err(Error::NonConvergence(format!(
                    "tail bound needs truncation radius e^{log_cut:.1}; exponent too close to the integrability threshold"
                )));
            }
            let body = if log_cut > EXTERIOR_HEAD.ln() {
                integrate_with_breaks(g, &[EXTERIOR_HEAD.ln(), log_cut], &cfg)?.value
            } else {
                0.0
            };
            if budget > 0.0 && tail_at(log_cut.exp()) > budget * (1.0 + 1e-9) {
                return Err(Error::NonConvergence(
                    "tail bound exceeds the error budget".into(),
                ));
            }
            head + body
        }
    };
    Ok((area * integral).powf(1.0 / p))
}

fn sup_norm<F: Fn(f64) -> f64>(f: &F, domain: &RadialDomain) -> f64 {
    let abs = |r: f64| f(r).abs();
    match *domain {
        RadialDomain::Ball { radius } => {
            let nodes: Vec<f64> = (0..=4000).map(|i| radius * i as f64 / 4000.0).collect();
            maximize_on_grid(abs, &nodes).1
        }
        RadialDomain::Exterior { .. } => {
            let log_max = 6.0 * std::f64::consts::LN_10;
            let nodes: Vec<f64> = (0..=6000).map(|i| log_max * i as f64 / 6000.0).collect();
            let (_, grid_best) = maximize_on_grid(|u: f64| abs(u.exp()), &nodes);
            // behaviour at infinity
            grid_best.max(abs(1e150))
        }
    }
}

/// A ball or exterior problem domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Ball(BallGeometry),
    Exterior(ExteriorGeometry),
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Self::Ball(b) => b.n,
            Self::Exterior(e) => e.n,
        }
    }

    pub fn is_exterior(&self) -> bool {
        matches!(self, Self::Exterior(_))
    }

    /// Radius of the boundary sphere (`R`, or 1 for the exterior).
    pub fn boundary_radius(&self) -> f64 {
        match self {
            Self::Ball(b) => b.radius,
            Self::Exterior(_) => 1.0,
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Self::Ball(b) => b.center.clone(),
            Self::Exterior(e) => vec![0.0; e.n],
        }
    }

    /// `|grad U|` on the boundary: `R` for the ball, 1 for the exterior.
    pub fn boundary_slope(&self) -> f64 {
        self.boundary_radius()
    }

    pub fn base_profile(&self) -> RadialProfile {
        match self {
            Self::Ball(b) => RadialProfile::ball_base(b.radius),
            Self::Exterior(e) => RadialProfile::exterior_base(e.n),
        }
    }

    pub fn check_exponents(&self, p: NormExponent, q: NormExponent) -> Result<()> {
        if let Self::Exterior(e) = self {
            check_u_ext_exponent(p, e.n)?;
            check_grad_ext_exponent(q, e.n)?;
        }
        Ok(())
    }

    /// Closed-form `||U||_p`.
    pub fn norm_u(&self, p: NormExponent) -> Result<f64> {
        match self {
            Self::Ball(b) => norm_u_ball(p, b),
            Self::Exterior(e) => norm_u_ext(p, e),
        }
    }

    /// Closed-form `||grad U||_q`.
    pub fn norm_grad(&self, q: NormExponent) -> Result<f64> {
        match self {
            Self::Ball(b) => norm_grad_u_ball(q, b),
            Self::Exterior(e) => norm_grad_u_ext(q, e),
        }
    }

    /// `||a U||_p` by quadrature.
    pub fn norm_u_quadrature(
        &self,
        amplitude: f64,
        p: NormExponent,
        cfg: &QuadConfig,
    ) -> Result<f64> {
        let profile = self.base_profile();
        let f = |r: f64| amplitude * profile.value(r);
        match self {
            Self::Ball(b) => norm_quadrature(
                f,
                p,
                b.n,
                &RadialDomain::Ball { radius: b.radius },
                &[],
                cfg,
            ),
            Self::Exterior(e) => {
                check_u_ext_exponent(p, e.n)?;
                // |U| <= r^{2-N} / 2
                let tail = PowerEnvelope {
                    coeff: 0.5 * amplitude.abs(),
                    decay: e.n as f64 - 2.0,
                };
                norm_quadrature(f, p, e.n, &RadialDomain::Exterior { tail }, &[], cfg)
            }
        }
    }

    /// `||grad(a U)||_q` by quadrature.
    pub fn norm_grad_quadrature(
        &self,
        amplitude: f64,
        q: NormExponent,
        cfg: &QuadConfig,
    ) -> Result<f64> {
        let profile = self.base_profile();
        let f = |r: f64| amplitude * profile.d1(r);
        match self {
            Self::Ball(b) => norm_quadrature(
                f,
                q,
                b.n,
                &RadialDomain::Ball { radius: b.radius },
                &[],
                cfg,
            ),
            Self::Exterior(e) => {
                check_grad_ext_exponent(q, e.n)?;
                let nf = e.n as f64;
                // N = 2: |U'| = r^{-3};  N >= 3: |U'| <= (N-1) r^{1-N}, zero at r^2 = N/(N-2)
                let (tail, kinks) = if e.n == 2 {
                    (
                        PowerEnvelope {
                            coeff: amplitude.abs(),
                            decay: 3.0,
                        },
                        vec![],
                    )
                } else {
                    (
                        PowerEnvelope {
                            coeff: (nf - 1.0) * amplitude.abs(),
                            decay: nf - 1.0,
                        },
                        vec![(nf / (nf - 2.0)).sqrt()],
                    )
                };
                norm_quadrature(f, q, e.n, &RadialDomain::Exterior { tail }, &kinks, cfg)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fin(v: f64) -> NormExponent {
        NormExponent::finite(v).unwrap()
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(
            "inf".parse::<NormExponent>().unwrap(),
            NormExponent::Infinity
        );
        assert_eq!(
            "Infinity".parse::<NormExponent>().unwrap(),
            NormExponent::Infinity
        );
        assert_eq!("2.5".parse::<NormExponent>().unwrap(), fin(2.5));
        assert!("0".parse::<NormExponent>().is_err());
        assert!("-1".parse::<NormExponent>().is_err());
        assert!("abc".parse::<NormExponent>().is_err());
    }

    #[test]
    fn ball_pointwise() {
        let g = BallGeometry::new(2, 1.0, vec![0.5, -0.5]).unwrap();
        assert_eq!(u_ball(&[0.5, -0.5], &g).unwrap(), -0.5);
        assert_eq!(grad_u_ball(&[0.5, -0.5], &g).unwrap(), vec![0.0, 0.0]);
        let b = [0.5 + 0.6, -0.5 + 0.8];
        assert!(u_ball(&b, &g).unwrap().abs() < 1e-15);
        let grad = grad_u_ball(&b, &g).unwrap();
        assert!((grad[0] - 0.6).abs() < 1e-15 && (grad[1] - 0.8).abs() < 1e-15);
        assert!(u_ball(&[2.0, 0.0], &g).is_err());
    }

    #[test]
    fn exterior_pointwise() {
        for n in 2..=5 {
            let g = ExteriorGeometry::new(n).unwrap();
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            assert_eq!(u_ext(&x, &g).unwrap(), 0.0);
            assert!((norm(&grad_u_ext(&x, &g).unwrap()) - 1.0).abs() < 1e-15);
            x[0] = 1e8;
            let far = u_ext(&x, &g).unwrap();
            if n == 2 {
                assert!((far + 0.5).abs() < 1e-12);
            } else {
                assert!(far.abs() < 1e-7);
            }
            x[0] = 0.5;
            assert!(u_ext(&x, &g).is_err());
        }
        assert!(ExteriorGeometry::new(1).is_err());
    }

    #[test]
    fn ball_norm_examples() {
        let g = BallGeometry::centered(2, 1.0).unwrap();
        assert!((norm_u_ball(fin(2.0), &g).unwrap() - (PI / 12.0).sqrt()).abs() < 1e-14);
        assert!((norm_grad_u_ball(fin(2.0), &g).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-14);
        let g3 = BallGeometry::centered(3, 2.0).unwrap();
        assert_eq!(norm_grad_u_ball(NormExponent::Infinity, &g3).unwrap(), 2.0);
        assert_eq!(norm_u_ball(NormExponent::Infinity, &g3).unwrap(), 2.0);
    }

    #[test]
    fn ball_norm_scaling_in_radius() {
        for &p in &[0.5, 1.0, 2.0, 7.0] {
            for n in 1..=4 {
                let one = BallGeometry::centered(n, 1.0).unwrap();
                for &r in &[0.5, 3.0] {
                    let g = BallGeometry::centered(n, r).unwrap();
                    let nf = n as f64;
                    let want_u = norm_u_ball(fin(p), &one).unwrap() * r.powf(2.0 + nf / p);
                    let want_g = norm_grad_u_ball(fin(p), &one).unwrap() * r.powf(1.0 + nf / p);
                    assert!((norm_u_ball(fin(p), &g).unwrap() / want_u - 1.0).abs() < 1e-12);
                    assert!((norm_grad_u_ball(fin(p), &g).unwrap() / want_g - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exterior_norm_examples() {
        let e2 = ExteriorGeometry::new(2).unwrap();
        assert_eq!(norm_u_ext(NormExponent::Infinity, &e2).unwrap(), 0.5);
        assert_eq!(norm_grad_u_ext(NormExponent::Infinity, &e2).unwrap(), 1.0);
        assert!((norm_grad_u_ext(fin(1.0), &e2).unwrap() - 2.0 * PI).abs() < 1e-13);

        let e3 = ExteriorGeometry::new(3).unwrap();
        let sup = norm_u_ext(NormExponent::Infinity, &e3).unwrap();
        let direct = -RadialProfile::exterior_base(3).value(3f64.sqrt());
        assert!((sup - direct).abs() < 1e-15);
        assert!((printed_norm_u_ext_inf(3) - (2.0f64 / 3.0).powf(1.5)).abs() < 1e-15);
        assert_eq!(norm_grad_u_ext(NormExponent::Infinity, &e3).unwrap(), 1.0);
        assert!((interior_peak_grad_u_ext(3) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn exterior_exponent_domains() {
        let e2 = ExteriorGeometry::new(2).unwrap();
        assert!(norm_u_ext(fin(5.0), &e2).is_err());
        assert!(norm_grad_u_ext(fin(2.0 / 3.0), &e2).is_err());
        let e4 = ExteriorGeometry::new(4).unwrap();
        assert!(norm_u_ext(fin(2.0), &e4).is_err());
        assert!(norm_u_ext(fin(2.01), &e4).is_ok());
        assert!(norm_grad_u_ext(fin(4.0 / 3.0), &e4).is_err());
    }

    #[test]
    fn quadrature_matches_ball_closed_forms() {
        let cfg = QuadConfig::default();
        for n in 1..=4 {
            let geom = Geometry::Ball(BallGeometry::centered(n, 1.7).unwrap());
            for p in [
                fin(0.5),
                fin(1.0),
                fin(2.0),
                fin(3.3),
                NormExponent::Infinity,
            ] {
                let a = geom.norm_u(p).unwrap();
                let b = geom.norm_u_quadrature(1.0, p, &cfg).unwrap();
                assert!((a / b - 1.0).abs() < 1e-9, "N={n} p={p}: {a} vs {b}");
                let a = geom.norm_grad(p).unwrap();
                let b = geom.norm_grad_quadrature(1.0, p, &cfg).unwrap();
                assert!((a / b - 1.0).abs() < 1e-9, "N={n} q={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn quadrature_matches_exterior_closed_forms() {
        let cfg = QuadConfig::default();
        for n in 3..=5 {
            let geom = Geometry::Exterior(ExteriorGeometry::new(n).unwrap());
            let nf = n as f64;
            for p in [fin(nf / (nf - 2.0) + 0.5), fin(4.0), NormExponent::Infinity] {
                let a = geom.norm_u(p).unwrap();
                let b = geom.norm_u_quadrature(1.0, p, &cfg).unwrap();
                assert!((a / b - 1.0).abs() < 1e-8, "N={n} p={p}: {a} vs {b}");
            }
            for q in [
                fin(nf / (nf - 1.0) + 0.25),
                fin(2.0),
                fin(3.0),
                NormExponent::Infinity,
            ] {
                let a = geom.norm_grad(q).unwrap();
                let b = geom.norm_grad_quadrature(1.0, q, &cfg).unwrap();
                assert!((a / b - 1.0).abs() < 1e-8, "N={n} q={q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn quadrature_rejects_nonintegrable_envelope() {
        let domain = RadialDomain::Exterior {
            tail: PowerEnvelope {
                coeff: 1.0,
                decay: 1.0,
            },
        };
        let err = norm_quadrature(
            |r| 1.0 / r,
            fin(3.0),
            3,
            &domain,
            &[],
            &QuadConfig::default(),
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}
