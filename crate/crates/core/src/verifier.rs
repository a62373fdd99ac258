//! End-to-end checks that constructed solutions satisfy the nonlocal PDE,
//! and numerical spot-checks of the Kelvin transform identities.
//!
//! Every norm entering `M` is recomputed by quadrature from the solution
//! itself; nothing is reused from the reduction. Sample points come from a
//! seeded ChaCha generator, so reports are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::base::Geometry;
use crate::error::{Error, Result};
use crate::hessian::{binomial, k_hessian_radial};
use crate::profile::{distance, norm, RadialProfile};
use crate::quadrature::QuadConfig;
use crate::reduction::{ProblemInstance, SolutionField};

/// Sampling and quadrature settings shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub interior_samples: usize,
    /// Random boundary points, on top of the `2N` points `±e_i`.
    pub boundary_samples: usize,
    pub seed: u64,
    /// Exterior interior samples lie in `1 < |x| <= r_check`.
    pub r_check: f64,
    pub quad: QuadConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            interior_samples: 100,
            boundary_samples: 16,
            seed: 0,
            r_check: 10.0,
            quad: QuadConfig::with_rel_tol(1e-12),
        }
    }
}

/// Far-field behaviour of an exterior solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    pub radius: f64,
    pub value: f64,
    /// `0` for `N >= 3`, `a / 2` for `N = 2`.
    pub limit: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Max over samples of `|M(||u||, ||grad u||) S_k(D^2 u) - rhs|`.
    pub max_interior_residual: f64,
    /// Max `|u|` on the boundary samples.
    pub boundary_value_max: f64,
    /// Max deviation of the normal derivative (ball) or `|grad u|` (exterior) from `c`.
    pub boundary_gradient_deviation: f64,
    pub c_reported: f64,
    pub sample_count: usize,
    pub boundary_sample_count: usize,
    pub norm_u: f64,
    pub norm_grad: f64,
    /// `M` at the recomputed norms.
    pub kernel_value: f64,
    pub decay: Option<DecayCheck>,
}

impl ResidualReport {
    pub fn within(&self, interior: f64, boundary_value: f64, boundary_gradient: f64) -> bool {
        self.max_interior_residual <= interior
            && self.boundary_value_max <= boundary_value
            && self.boundary_gradient_deviation <= boundary_gradient
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = norm(&v);
        if len > 1e-3 && len <= 1.0 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}

/// `±e_i` followed by `extra` seeded random directions.
fn boundary_directions(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * n + extra);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            dirs.push(e);
        }
    }
    dirs.extend((0..extra).map(|_| random_unit(rng, n)));
    dirs
}

fn shifted(center: &[f64], dir: &[f64], r: f64) -> Vec<f64> {
    center.iter().zip(dir).map(|(c, d)| c + r * d).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kernel_at_quadrature_norms(
    instance: &ProblemInstance,
    solution: &SolutionField,
    cfg: &VerifyConfig,
) -> Result<(f64, f64, f64)> {
    let geom = &instance.geometry;
    let nu = geom.norm_u_quadrature(solution.amplitude, instance.p, &cfg.quad)?;
    let ng = geom.norm_grad_quadrature(solution.amplitude, instance.q, &cfg.quad)?;
    Ok((nu, ng, instance.kernel.eval(nu, ng)?))
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Check `M(||u||_p, ||grad u||_q) S_k(D^2 u) = lambda` in the ball and
/// `u = 0`, `du/dnu = c` on its boundary.
pub fn verify_ball(
    instance: &ProblemInstance,
    solution: &SolutionField,
    cfg: &VerifyConfig,
) -> Result<ResidualReport> {
    let Geometry::Ball(ball) = &instance.geometry else {
        return Err(Error::domain("verify_ball needs a ball geometry"));
    };
    let (n, radius, center) = (ball.dim(), ball.radius(), ball.center());
    let (norm_u, norm_grad, m) = kernel_at_quadrature_norms(instance, solution, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let radii: Vec<f64> = (0..cfg.interior_samples)
        .map(|_| {
            // uniform in the ball, kept off the centre where phi'/r is 0/0
            let dir = random_unit(&mut rng, n);
            let x = shifted(
                center,
                &dir,
                radius * rng.gen_range(1e-6f64..1.0).powf(1.0 / n as f64),
            );
            distance(&x, center)
        })
        .collect();
    let profile = solution.profile();
    let residuals: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            k_hessian_radial(profile, r, n, instance.k).map(|sk| (m * sk - instance.lambda).abs())
        })
        .collect::<Result<_>>()?;

    let dirs = boundary_directions(&mut rng, n, cfg.boundary_samples);
    let c = solution.boundary_constant;
    let mut value_max: f64 = 0.0;
    let mut grad_dev: f64 = 0.0;
    for d in &dirs {
        let x = shifted(center, d, radius);
        value_max = value_max.max(solution.value(&x).abs());
        grad_dev = grad_dev.max((dot(&solution.gradient(&x), d) - c).abs());
    }

    Ok(ResidualReport {
        max_interior_residual: max_of(residuals.into_iter()),
        boundary_value_max: value_max,
        boundary_gradient_deviation: grad_dev,
        c_reported: c,
        sample_count: radii.len(),
        boundary_sample_count: dirs.len(),
        norm_u,
        norm_grad,
        kernel_value: m,
        decay: None,
    })
}

/// Check `M(||u||_p, ||grad u||_q) Delta u = lambda |x|^{-N-2}` outside the
/// unit ball, `u = 0` and `|grad u| = c` on `|x| = 1`, and the far field.
pub fn verify_exterior(
    instance: &ProblemInstance,
    solution: &SolutionField,
    cfg: &VerifyConfig,
) -> Result<ResidualReport> {
    let Geometry::Exterior(ext) = &instance.geometry else {
        return Err(Error::domain("verify_exterior needs an exterior geometry"));
    };
    if !(cfg.r_check > 1.0) {
        return Err(Error::domain("r_check must exceed 1"));
    }
    let n = ext.dim();
    let nf = n as f64;
    let (norm_u, norm_grad, m) = kernel_at_quadrature_norms(instance, solution, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let radii: Vec<f64> = (0..cfg.interior_samples)
        .map(|_| {
            let dir = random_unit(&mut rng, n);
            // log-uniform in (1, r_check]
            norm(&shifted(
                &vec![0.0; n],
                &dir,
                cfg.r_check.powf(rng.gen_range(1e-9f64..=1.0)),
            ))
        })
        .collect();
    let profile = solution.profile();
    let residuals: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            k_hessian_radial(profile, r, n, 1)
                .map(|lap| (m * lap - instance.lambda * r.powf(-nf - 2.0)).abs())
        })
        .collect::<Result<_>>()?;

    let dirs = boundary_directions(&mut rng, n, cfg.boundary_samples);
    let c = solution.boundary_constant;
    let origin = vec![0.0; n];
    let mut value_max: f64 = 0.0;
    let mut grad_dev: f64 = 0.0;
    for d in &dirs {
        let x = shifted(&origin, d, 1.0);
        value_max = value_max.max(solution.value(&x).abs());
        grad_dev = grad_dev.max((norm(&solution.gradient(&x)) - c).abs());
    }

    let far = if n == 2 { 1e8 } else { 1e6 };
    let value = profile.value(far);
    let limit = if n == 2 {
        -0.5 * solution.amplitude
    } else {
        0.0
    };
    let decay = DecayCheck {
        radius: far,
        value,
        limit,
        deviation: (value - limit).abs(),
    };

    Ok(ResidualReport {
        max_interior_residual: max_of(residuals.into_iter()),
        boundary_value_max: value_max,
        boundary_gradient_deviation: grad_dev,
        c_reported: c,
        sample_count: radii.len(),
        boundary_sample_count: dirs.len(),
        norm_u,
        norm_grad,
        kernel_value: m,
        decay: Some(decay),
    })
}

/// Dispatch on the geometry.
pub fn verify(
    instance: &ProblemInstance,
    solution: &SolutionField,
    cfg: &VerifyConfig,
) -> Result<ResidualReport> {
    if instance.geometry.is_exterior() {
        verify_exterior(instance, solution, cfg)
    } else {
        verify_ball(instance, solution, cfg)
    }
}

/// `psi(rho) = rho^{2-N} phi(1/rho)`, mapping a profile on `(r_min, r_max)`
/// to one on `(1/r_max, 1/r_min)`.
pub fn kelvin_transform(profile: &RadialProfile, n: usize) -> RadialProfile {
    let nf = n as f64;
    let (lo, hi) = profile.domain();
    let (p0, p1, p2) = (profile.clone(), profile.clone(), profile.clone());
    RadialProfile::new(
        move |rho: f64| rho.powf(2.0 - nf) * p0.value(1.0 / rho),
        move |rho: f64| {
            let x = 1.0 / rho;
            (2.0 - nf) * rho.powf(1.0 - nf) * p1.value(x) - rho.powf(-nf) * p1.d1(x)
        },
        move |rho: f64| {
            let x = 1.0 / rho;
            (nf - 1.0) * (nf - 2.0) * rho.powf(-nf) * p2.value(x)
                + (2.0 * nf - 2.0) * rho.powf(-nf - 1.0) * p2.d1(x)
                + rho.powf(-nf - 2.0) * p2.d2(x)
        },
        1.0 / hi,
        if lo == 0.0 { f64::INFINITY } else { 1.0 / lo },
    )
}

/// `w(y) = |y|^{2-N} u(y / |y|^2)` for a field `u` on `R^N`.
pub fn kelvin_field<'a, F: Fn(&[f64]) -> f64 + 'a>(u: F, n: usize) -> impl Fn(&[f64]) -> f64 + 'a {
    move |y: &[f64]| {
        let r2 = dot(y, y);
        let x: Vec<f64> = y.iter().map(|c| c / r2).collect();
        r2.sqrt().powf(2.0 - n as f64) * u(&x)
    }
}

/// Central-difference gradient with step `h`.
pub fn gradient_fd<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Checks on the transform of the exterior base solution itself.
#[derive(Debug, Clone, PartialEq)]
pub struct KelvinBaseChecks {
    /// Max `|psi(rho) - (rho^2 - 1)/2|`.
    pub closed_form_deviation: f64,
    /// Max `|Delta psi - N|` over interior samples.
    pub laplacian_deviation: f64,
    /// `|psi'(1)|`, expected `1`.
    pub boundary_gradient: f64,
}

/// Normal/tangential split `grad u = a + b` at boundary samples of a
/// non-radial field.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionChecks {
    pub samples: usize,
    /// Max `|a . b|`.
    pub orthogonality: f64,
    /// Max `||a|^2 + |b|^2 - |grad u|^2|`.
    pub pythagoras: f64,
    /// Max `|a + b - grad u|`.
    pub reconstruction: f64,
    /// Max `||grad w|^2 - |grad u|^2|` with `w` the transformed field.
    pub boundary_identity: f64,
    /// Max `|grad w - (b - a)|`: the transform reflects the normal part.
    pub reflection: f64,
}

/// Evidence, not proof, of the removable singularity of the transform at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovabilityChecks {
    /// `(rho, ratio)` for `rho = 2^{-j}`, `j = 4..=20`; the ratio is
    /// `|psi| / rho^{2-N}` for `N >= 3` and `|psi| / ln(1/rho)` for `N = 2`.
    pub ratios: Vec<(f64, f64)>,
    pub monotone_decreasing: bool,
    pub note: &'static str,
}

pub const REMOVABILITY_NOTE: &str =
    "monotone decay along a finite sequence is numerical evidence for the limit, not a certificate";

#[derive(Debug, Clone, PartialEq)]
pub struct KelvinReport {
    pub n: usize,
    pub base: KelvinBaseChecks,
    /// Max relative deviation of `Delta psi(rho)` from `rho^{-N-2} (Delta phi)(1/rho)`.
    pub laplacian_identity: f64,
    /// Max `||grad w|^2 - |x|^{2N} |grad u|^2|` at `|x| = 1` for the radial field.
    pub radial_boundary_identity: f64,
    /// Max deviation of the double transform from the original (value, first, second derivative).
    pub involution: f64,
    pub decomposition: DecompositionChecks,
    pub removability: RemovabilityChecks,
}

/// Kelvin transform spot-checks for an exterior profile in dimension `n`.
///
/// The non-radial test field is `x_1 phi(|x|)`.
pub fn kelvin_checks(profile: &RadialProfile, n: usize, seed: u64) -> Result<KelvinReport> {
    if n < 2 {
        return Err(Error::domain("Kelvin transform needs N >= 2"));
    }
    let (lo, _) = profile.domain();
    if lo != 1.0 {
        return Err(Error::domain("Kelvin checks expect a profile on [1, inf)"));
    }
    let nf = n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior: Vec<f64> = (0..50).map(|_| rng.gen_range(0.05..1.0)).collect();

    let base_psi = kelvin_transform(&RadialProfile::exterior_base(n), n);
    let closed_form_deviation = max_of(
        interior
            .iter()
            .chain(&[1.0, 0.5, 0.05])
            .map(|&rho| (base_psi.value(rho) - 0.5 * (rho * rho - 1.0)).abs()),
    );
    let mut laplacian_deviation: f64 = 0.0;
    for &rho in &interior {
        laplacian_deviation =
            laplacian_deviation.max((k_hessian_radial(&base_psi, rho, n, 1)? - nf).abs());
    }
    let base = KelvinBaseChecks {
        closed_form_deviation,
        laplacian_deviation,
        boundary_gradient: base_psi.d1(1.0).abs(),
    };

    let psi = kelvin_transform(profile, n);
    let mut laplacian_identity: f64 = 0.0;
    for &rho in &interior {
        let lhs = k_hessian_radial(&psi, rho, n, 1)?;
        let rhs = rho.powf(-nf - 2.0) * k_hessian_radial(profile, 1.0 / rho, n, 1)?;
        laplacian_identity = laplacian_identity.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }

    let back = kelvin_transform(&psi, n);
    let mut involution: f64 = 0.0;
    for _ in 0..50 {
        let r = rng.gen_range(1.0f64..50.0);
        involution = involution
            .max((back.value(r) - profile.value(r)).abs())
            .max((back.d1(r) - profile.d1(r)).abs())
            .max((back.d2(r) - profile.d2(r)).abs());
    }

    let h = 1e-5;
    let origin = vec![0.0; n];
    let radial_u = |x: &[f64]| profile.value(norm(x));
    let radial_w = kelvin_field(radial_u, n);
    let test_u = |x: &[f64]| x[0] * profile.value(norm(x));
    let test_w = kelvin_field(test_u, n);
    let dirs = boundary_directions(&mut rng, n, 16);
    let mut radial_boundary_identity: f64 = 0.0;
    let mut dec = DecompositionChecks {
        samples: dirs.len(),
        orthogonality: 0.0,
        pythagoras: 0.0,
        reconstruction: 0.0,
        boundary_identity: 0.0,
        reflection: 0.0,
    };
    for d in &dirs {
        let x = shifted(&origin, d, 1.0);
        let gu = profile.field_gradient(&x, &origin);
        let gw = gradient_fd(&radial_w, &x, h);
        let scale = norm(&x).powf(2.0 * nf);
        radial_boundary_identity =
            radial_boundary_identity.max((dot(&gw, &gw) - scale * dot(&gu, &gu)).abs());

        let gu = gradient_fd(test_u, &x, h);
        let along = dot(&gu, d);
        let a: Vec<f64> = d.iter().map(|c| along * c).collect();
        let b: Vec<f64> = gu.iter().zip(&a).map(|(g, a)| g - a).collect();
        let gw = gradient_fd(&test_w, &x, h);
        let recon = max_of(
            gu.iter()
                .zip(a.iter().zip(&b))
                .map(|(g, (a, b))| (a + b - g).abs()),
        );
        let refl = max_of(
            gw.iter()
                .zip(a.iter().zip(&b))
                .map(|(w, (a, b))| (w - (b - a)).abs()),
        );
        dec.orthogonality = dec.orthogonality.max(dot(&a, &b).abs());
        dec.pythagoras = dec
            .pythagoras
            .max((dot(&a, &a) + dot(&b, &b) - dot(&gu, &gu)).abs());
        dec.reconstruction = dec.reconstruction.max(recon);
        dec.boundary_identity = dec
            .boundary_identity
            .max((dot(&gw, &gw) - dot(&gu, &gu)).abs());
        dec.reflection = dec.reflection.max(refl);
    }

    let ratios: Vec<(f64, f64)> = (4..=20)
        .map(|j| {
            let rho = 2f64.powi(-j);
            let denom = if n == 2 {
                (1.0 / rho).ln()
            } else {
                rho.powf(2.0 - nf)
            };
            (rho, psi.value(rho).abs() / denom)
        })
        .collect();
    let monotone_decreasing = ratios.windows(2).all(|w| w[1].1 < w[0].1);

    Ok(KelvinReport {
        n,
        base,
        laplacian_identity,
        radial_boundary_identity,
        involution,
        decomposition: dec,
        removability: RemovabilityChecks {
            ratios,
            monotone_decreasing,
            note: REMOVABILITY_NOTE,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    /// `(M C / lambda)^{1/k}` at the quadrature norms.
    pub gamma: f64,
    /// `gamma a`; equals 1 exactly when `v = gamma u` is the base solution.
    pub gamma_amplitude: f64,
    /// Ball: max `|S_k(D^2 v) - C(N,k)|`. Exterior: max relative deviation of
    /// `Delta v` from `N |x|^{-N-2}`.
    pub max_deviation: f64,
    pub samples: usize,
}

/// Rescale `u` by `gamma` so that the nonlocal equation becomes the local one
/// solved by the base solution, and check it at samples.
pub fn gamma_scaling_check(
    instance: &ProblemInstance,
    solution: &SolutionField,
    cfg: &VerifyConfig,
) -> Result<GammaReport> {
    let (_, _, m) = kernel_at_quadrature_norms(instance, solution, cfg)?;
    let n = instance.geometry.dim();
    let k = instance.k;
    let c = binomial(n, k)? as f64;
    let gamma = (m * c / instance.lambda).powf(1.0 / k as f64);
    let v = solution.profile().scaled(gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r0 = instance.geometry.boundary_radius();
    let mut dev: f64 = 0.0;
    for _ in 0..cfg.interior_samples {
        if instance.geometry.is_exterior() {
            let r = cfg.r_check.powf(rng.gen_range(1e-9f64..=1.0));
            let want = n as f64 * r.powf(-(n as f64) - 2.0);
            dev = dev.max((k_hessian_radial(&v, r, n, 1)? - want).abs() / want);
        } else {
            let r = r0 * rng.gen_range(1e-6f64..1.0).powf(1.0 / n as f64);
            dev = dev.max((k_hessian_radial(&v, r, n, k)? - c).abs());
        }
    }
    Ok(GammaReport {
        gamma,
        gamma_amplitude: gamma * solution.amplitude,
        max_deviation: dev,
        samples: cfg.interior_samples,
    })
}
