//! Reduction of a nonlocal overdetermined problem to one scalar equation.
//!
//! With `U` the base solution of the geometry, `C = C(N, k)` and
//! `rho = ||grad U||_q / ||U||_p`, solutions `u` are in bijection with the
//! positive roots `s*` of
//!
//! ```text
//! g(s) = C s^k M(s, rho s) = lambda ||U||_p^k
//! ```
//!
//! via `u = (s* / ||U||_p) U`. The exterior problem is the case `k = 1`,
//! `C = N`. The same roots are the solutions of the two-variable system
//! `s = A(s,t) ||U||_p`, `t = A(s,t) ||grad U||_q` with
//! `A = (M(s,t) C / lambda)^{-1/k}`, which [`system_count_check`] scans
//! independently.

use rayon::prelude::*;

use crate::base::{Geometry, NormExponent};
use crate::error::{Error, Result};
use crate::hessian::binomial;
use crate::kernel::KernelExpr;
use crate::profile::RadialProfile;
use crate::quadrature::golden_max;

/// One nonlocal overdetermined problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub geometry: Geometry,
    pub k: usize,
    pub p: NormExponent,
    pub q: NormExponent,
    pub lambda: f64,
    pub kernel: KernelExpr,
}

impl ProblemInstance {
    pub fn new(
        geometry: Geometry,
        k: usize,
        p: NormExponent,
        q: NormExponent,
        lambda: f64,
        kernel: KernelExpr,
    ) -> Result<Self> {
        let inst = Self {
            geometry,
            k,
            p,
            q,
            lambda,
            kernel,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.geometry.dim();
        match self.geometry {
            Geometry::Ball(_) if self.k == 0 || self.k > n => {
                return Err(Error::domain(format!(
                    "k must lie in 1..={n}, got {}",
                    self.k
                )));
            }
            Geometry::Exterior(_) if self.k != 1 => {
                return Err(Error::domain(
                    "the exterior problem is posed for the Laplacian (k = 1)",
                ));
            }
            _ => {}
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        self.geometry.check_exponents(self.p, self.q)
    }

    /// `C(N, k)`; equals `N` for the exterior problem.
    pub fn coefficient(&self) -> f64 {
        binomial(self.geometry.dim(), self.k).expect("validated k <= N") as f64
    }
}

/// The scalar equation `g(s) = target`.
#[derive(Debug, Clone)]
pub struct ReducedEquation {
    pub geometry: Geometry,
    pub kernel: KernelExpr,
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    /// `C(N, k)`.
    pub coefficient: f64,
    /// `||U||_p`.
    pub norm_u: f64,
    /// `||grad U||_q`.
    pub norm_grad: f64,
    /// `||grad U||_q / ||U||_p`.
    pub rho: f64,
    /// `lambda ||U||_p^k`.
    pub target: f64,
}

/// Closed-form norms and the reduced equation of `instance`.
pub fn build_reduced(instance: &ProblemInstance) -> Result<ReducedEquation> {
    instance.validate()?;
    let norm_u = instance.geometry.norm_u(instance.p)?;
    let norm_grad = instance.geometry.norm_grad(instance.q)?;
    let k = instance.k;
    Ok(ReducedEquation {
        geometry: instance.geometry.clone(),
        kernel: instance.kernel.clone(),
        k,
        n: instance.geometry.dim(),
        lambda: instance.lambda,
        coefficient: instance.coefficient(),
        norm_u,
        norm_grad,
        rho: norm_grad / norm_u,
        target: instance.lambda * norm_u.powi(k as i32),
    })
}

impl ReducedEquation {
    /// `g(s) = C s^k M(s, rho s)`.
    pub fn g(&self, s: f64) -> Result<f64> {
        Ok(self.coefficient * s.powi(self.k as i32) * self.kernel.eval(s, self.rho * s)?)
    }

    /// `g(s) - target`.
    pub fn residual(&self, s: f64) -> Result<f64> {
        Ok(self.g(s)? - self.target)
    }

    /// `s / ||U||_p`, the factor multiplying `U` in the solution.
    pub fn amplitude(&self, s: f64) -> f64 {
        s / self.norm_u
    }

    /// Boundary constant `c` of the solution for root `s`.
    pub fn boundary_constant(&self, s: f64) -> f64 {
        self.amplitude(s) * self.geometry.boundary_slope()
    }

    /// Root for `M = 1`: `(target / C)^{1/k}`.
    pub fn analytic_scale(&self) -> f64 {
        (self.target / self.coefficient).powf(1.0 / self.k as f64)
    }
}

/// Where and how finely [`solve_roots`] looks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub s_min: f64,
    /// Defaults to `max(10 * analytic_scale, 1e3)`.
    pub s_max: Option<f64>,
    /// Number of log-spaced grid points.
    pub grid: usize,
    /// Root acceptance: `|g(s*) - target| <= tol * max(1, target)`.
    pub tol: f64,
    /// Relative bracket width at which bisection stops.
    pub tol_s: f64,
    /// Sign-preserving local minima of `|g - target|` at or below
    /// `tangency_threshold * max(1, target)` are reported as tangential roots.
    pub tangency_threshold: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            s_min: 1e-8,
            s_max: None,
            grid: 10_000,
            tol: 1e-10,
            tol_s: 1e-14,
            tangency_threshold: 1e-9,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.s_min, self.tol, self.tol_s, self.tangency_threshold];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain("scan tolerances and s_min must be positive"));
        }
        if self.grid < 100 {
            return Err(Error::domain(format!(
                "scan grid needs at least 100 points, got {}",
                self.grid
            )));
        }
        if let Some(hi) = self.s_max {
            if !(hi > self.s_min && hi.is_finite()) {
                return Err(Error::domain(format!(
                    "s_max = {hi} must exceed s_min = {}",
                    self.s_min
                )));
            }
        }
        Ok(())
    }

    pub fn range(&self, eq: &ReducedEquation) -> (f64, f64) {
        let hi = self
            .s_max
            .unwrap_or_else(|| (10.0 * eq.analytic_scale()).max(1e3));
        (self.s_min, hi)
    }

    /// The log-spaced scan grid.
    pub fn grid_points(&self, eq: &ReducedEquation) -> Vec<f64> {
        log_grid(self.range(eq), self.grid)
    }
}

pub(crate) fn log_grid((lo, hi): (f64, f64), points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = points - 1;
    (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == last => hi,
            i => (a + (b - a) * i as f64 / last as f64).exp(),
        })
        .collect()
}

/// A root of the reduced equation and the solution it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub s: f64,
    pub amplitude: f64,
    pub boundary_constant: f64,
    /// Final bracket (or, for a tangential root, the grid cell pair searched).
    pub bracket: (f64, f64),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionStructure {
    /// Sign-change roots, strictly increasing.
    pub roots: Vec<Root>,
    /// Suspected tangential roots; reported but not counted.
    pub tangential: Vec<Root>,
    /// `roots.len()`.
    pub count: usize,
    /// Set when the kernel is non-smooth or a bracket straddled a
    /// discontinuity, so sign changes may miss roots.
    pub count_is_lower_bound: bool,
    /// Sign-change brackets that did not converge to a root (poles, jumps).
    pub rejected_brackets: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
    pub s_range: (f64, f64),
}

impl SolutionStructure {
    /// Transversal plus tangential roots.
    pub fn total_with_tangential(&self) -> usize {
        self.roots.len() + self.tangential.len()
    }

    /// All roots, tangential ones included, in increasing order.
    pub fn all_roots(&self) -> Vec<&Root> {
        let mut all: Vec<&Root> = self.roots.iter().chain(&self.tangential).collect();
        all.sort_by(|a, b| a.s.total_cmp(&b.s));
        all
    }
}

/// Find all positive roots of `g(s) = target` in the scan range.
///
/// Sign changes on the log grid are refined by bisection. Grid cells where
/// `|g - target|` has a local minimum without a sign change are polished by
/// golden-section search and reported as tangential when the minimum is
/// below the tangency threshold.
pub fn solve_roots(eq: &ReducedEquation, scan: &ScanConfig) -> Result<SolutionStructure> {
    scan.validate()?;
    let grid = scan.grid_points(eq);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&s| eq.residual(s))
        .collect::<Result<_>>()?;

    let scale = eq.target.max(1.0);
    let accept = scan.tol * scale;
    let mut roots: Vec<Root> = Vec::new();
    let mut rejected = Vec::new();

    for i in 0..grid.len() {
        let (s0, h0) = (grid[i], values[i]);
        if h0 == 0.0 {
            roots.push(make_root(eq, s0, (s0, s0), 0.0));
            continue;
        }
        if i + 1 < grid.len() {
            let h1 = values[i + 1];
            if h1 != 0.0 && h0.signum() != h1.signum() {
                let (s, bracket, res) = bisect(eq, (s0, h0), (grid[i + 1], h1), scan.tol_s)?;
                if res <= accept {
                    roots.push(make_root(eq, s, bracket, res));
                } else {
                    rejected.push(bracket);
                }
            }
        }
    }
    dedup_roots(&mut roots, scan.tol_s);

    let mut tangential: Vec<Root> = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        let (hl, h, hr) = (values[i - 1], values[i], values[i + 1]);
        let same_sign = h != 0.0 && hl.signum() == h.signum() && hr.signum() == h.signum();
        if !(same_sign && h.abs() < hl.abs() && h.abs() <= hr.abs()) {
            continue;
        }
        let (lo, hi) = (grid[i - 1], grid[i + 1]);
        let closeness = |s: f64| {
            eq.residual(s)
                .map(|v| -v.abs())
                .unwrap_or(f64::NEG_INFINITY)
        };
        let (s, neg_abs) = golden_max(closeness, lo, hi, scan.tol_s * hi);
        let res = -neg_abs;
        if res <= scan.tangency_threshold * scale && !roots.iter().any(|r| r.s >= lo && r.s <= hi) {
            tangential.push(make_root(eq, s, (lo, hi), res));
        }
    }

    let mut warnings = Vec::new();
    let (first, last) = (values[0], values[values.len() - 1]);
    if last < 0.0 {
        warnings.push(format!(
            "g(s_max) < target at s_max = {:e}: further roots beyond the scan range are possible",
            grid[grid.len() - 1]
        ));
    }
    if first > 0.0 {
        warnings.push(format!(
            "g(s_min) > target at s_min = {:e}: roots below the scan range are possible",
            grid[0]
        ));
    }
    if !rejected.is_empty() {
        warnings.push(format!(
            "{} sign change(s) did not converge to a root (discontinuity or pole)",
            rejected.len()
        ));
    }

    Ok(SolutionStructure {
        count: roots.len(),
        count_is_lower_bound: eq.kernel.is_nonsmooth() || !rejected.is_empty(),
        roots,
        tangential,
        rejected_brackets: rejected,
        warnings,
        s_range: (grid[0], grid[grid.len() - 1]),
    })
}

fn make_root(eq: &ReducedEquation, s: f64, bracket: (f64, f64), residual: f64) -> Root {
    Root {
        s,
        amplitude: eq.amplitude(s),
        boundary_constant: eq.boundary_constant(s),
        bracket,
        residual,
    }
}

fn bisect(
    eq: &ReducedEquation,
    (mut a, mut ha): (f64, f64),
    (mut b, mut hb): (f64, f64),
    tol_s: f64,
) -> Result<(f64, (f64, f64), f64)> {
    while b - a > tol_s * b {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let hm = eq.residual(m)?;
        if hm == 0.0 {
            return Ok((m, (a, b), 0.0));
        }
        if hm.signum() == ha.signum() {
            a = m;
            ha = hm;
        } else {
            b = m;
            hb = hm;
        }
    }
    let (s, h) = if ha.abs() <= hb.abs() {
        (a, ha)
    } else {
        (b, hb)
    };
    Ok((s, (a, b), h.abs()))
}

fn dedup_roots(roots: &mut Vec<Root>, tol_s: f64) {
    roots.sort_by(|a, b| a.s.total_cmp(&b.s));
    roots.dedup_by(|later, earlier| (later.s - earlier.s).abs() <= tol_s * later.s.max(1.0));
}

/// The explicit solution `u = a U` attached to one root.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub s: f64,
    pub amplitude: f64,
    pub boundary_constant: f64,
    pub tangential: bool,
    geometry: Geometry,
    profile: RadialProfile,
}

impl SolutionField {
    /// `a U` for an explicit amplitude `a`, attached to root `s`.
    pub fn new(geometry: &Geometry, s: f64, amplitude: f64, tangential: bool) -> Self {
        Self {
            s,
            amplitude,
            boundary_constant: amplitude * geometry.boundary_slope(),
            tangential,
            profile: geometry.base_profile().scaled(amplitude),
            geometry: geometry.clone(),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Radial profile `a phi` of the solution.
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.profile.field_value(x, &self.geometry.center())
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.profile.field_gradient(x, &self.geometry.center())
    }

    /// The same field with amplitude multiplied by `factor`.
    pub fn perturbed(&self, factor: f64) -> Self {
        Self::new(
            &self.geometry,
            self.s,
            self.amplitude * factor,
            self.tangential,
        )
    }
}

/// Solutions for every root, tangential ones last.
pub fn roots_to_solutions(
    eq: &ReducedEquation,
    structure: &SolutionStructure,
) -> Vec<SolutionField> {
    structure
        .roots
        .iter()
        .map(|r| (r, false))
        .chain(structure.tangential.iter().map(|r| (r, true)))
        .map(|(r, tangential)| SolutionField::new(&eq.geometry, r.s, eq.amplitude(r.s), tangential))
        .collect()
}

/// Settings for the brute-force scan of the two-variable system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemScanConfig {
    /// Grid points per axis.
    pub points: usize,
    /// Grid local minima with residual below this are polished.
    pub candidate_threshold: f64,
    /// A polished point counts as a solution when its residual is at most this.
    pub accept_residual: f64,
    /// Points closer than this in `(ln s, ln t)` are one cluster.
    pub cluster_tol: f64,
    /// At most this many candidates are polished, best first.
    pub max_candidates: usize,
}

impl Default for SystemScanConfig {
    fn default() -> Self {
        Self {
            points: 600,
            candidate_threshold: 0.5,
            accept_residual: 1e-9,
            cluster_tol: 1e-3,
            max_candidates: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemCluster {
    pub s: f64,
    pub t: f64,
    pub residual: f64,
    /// `|ln(t / (rho s))|`.
    pub ray_deviation: f64,
    /// Index into `SolutionStructure::all_roots`.
    pub matched_root: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemReport {
    pub clusters: Vec<SystemCluster>,
    /// Roots of the single equation, tangential ones included.
    pub root_count: usize,
    pub max_ray_deviation: f64,
    /// Roots with no matching cluster.
    pub unmatched_roots: Vec<f64>,
    /// Clusters found outside the scanned `s` range.
    pub discarded_out_of_range: usize,
    /// Every cluster lies on the ray and matches exactly one root, and vice versa.
    pub consistent: bool,
}

impl SystemReport {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }
}

/// `|(e1, e2)|` with `e1 = ln(A ||U|| / s)`, `e2 = ln(A ||grad U|| / t)`,
/// `A = (M(s,t) C / lambda)^{-1/k}`; infinite where `M <= 0` or faults.
pub fn system_residual(eq: &ReducedEquation, s: f64, t: f64) -> f64 {
    match eq.kernel.eval(s, t) {
        Ok(m) if m > 0.0 => {
            let log_a = -(m * eq.coefficient / eq.lambda).ln() / eq.k as f64;
            let e1 = log_a + eq.norm_u.ln() - s.ln();
            let e2 = log_a + eq.norm_grad.ln() - t.ln();
            e1.hypot(e2)
        }
        _ => f64::INFINITY,
    }
}

/// Scan the two-variable system on a log grid, polish local minima of its
/// residual, cluster the zeros and match them against the roots of the
/// single equation.
pub fn system_count_check(
    eq: &ReducedEquation,
    structure: &SolutionStructure,
    cfg: &SystemScanConfig,
) -> Result<SystemReport> {
    if cfg.points < 10 {
        return Err(Error::domain(
            "system scan needs at least 10 points per axis",
        ));
    }
    let (s_lo, s_hi) = structure.s_range;
    let (ls0, ls1) = (s_lo.ln(), s_hi.ln());
    let (lt0, lt1) = ((eq.rho * s_lo / 10.0).ln(), (eq.rho * s_hi * 10.0).ln());
    let n = cfg.points;
    let step_s = (ls1 - ls0) / (n - 1) as f64;
    let step_t = (lt1 - lt0) / (n - 1) as f64;
    let coord = |i: usize, j: usize| (ls0 + step_s * i as f64, lt0 + step_t * j as f64);
    let resid = |ls: f64, lt: f64| system_residual(eq, ls.exp(), lt.exp());

    let field: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = coord(idx / n, idx % n);
            resid(x, y)
        })
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = field[i * n + j];
            if !(v < cfg.candidate_threshold) {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    let w = field[a as usize * n + b as usize];
                    // ties broken by index so flat spots yield one candidate
                    if w < v || (w == v && (a, b) < (i as i64, j as i64)) {
                        is_min = false;
                    }
                }
            }
            if is_min {
                candidates.push((v, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    candidates.truncate(cfg.max_candidates);

    let polished: Vec<(f64, f64, f64)> = candidates
        .par_iter()
        .map(|&(_, i, j)| {
            let start = coord(i, j);
            let (x, fx) = nelder_mead(|p| resid(p[0], p[1]), [start.0, start.1], [step_s, step_t]);
            (x[0], x[1], fx)
        })
        .collect();

    let mut clusters: Vec<SystemCluster> = Vec::new();
    let mut discarded = 0;
    for (ls, lt, fx) in polished {
        if !(fx <= cfg.accept_residual) {
            continue;
        }
        if ls < ls0 - cfg.cluster_tol || ls > ls1 + cfg.cluster_tol {
            discarded += 1;
            continue;
        }
        let dup = clusters
            .iter()
            .any(|c| (c.s.ln() - ls).hypot(c.t.ln() - lt) <= cfg.cluster_tol);
        if !dup {
            clusters.push(SystemCluster {
                s: ls.exp(),
                t: lt.exp(),
                residual: fx,
                ray_deviation: (lt - (eq.rho.ln() + ls)).abs(),
                matched_root: None,
            });
        }
    }
    clusters.sort_by(|a, b| a.s.total_cmp(&b.s));

    let roots = structure.all_roots();
    let mut root_hits = vec![0usize; roots.len()];
    let mut all_single = true;
    for c in clusters.iter_mut() {
        let hits: Vec<usize> = roots
            .iter()
            .enumerate()
            .filter(|(_, r)| (r.s.ln() - c.s.ln()).abs() <= cfg.cluster_tol)
            .map(|(i, _)| i)
            .collect();
        if hits.len() == 1 {
            c.matched_root = Some(hits[0]);
            root_hits[hits[0]] += 1;
        } else {
            all_single = false;
        }
    }
    let unmatched_roots: Vec<f64> = roots
        .iter()
        .zip(&root_hits)
        .filter(|(_, &h)| h == 0)
        .map(|(r, _)| r.s)
        .collect();
    let max_ray_deviation = clusters.iter().map(|c| c.ray_deviation).fold(0.0, f64::max);
    let consistent = all_single
        && unmatched_roots.is_empty()
        && root_hits.iter().all(|&h| h == 1)
        && clusters.len() == roots.len()
        && max_ray_deviation <= 1e-6;

    Ok(SystemReport {
        clusters,
        root_count: roots.len(),
        max_ray_deviation,
        unmatched_roots,
        discarded_out_of_range: discarded,
        consistent,
    })
}

/// Nelder–Mead minimization in two dimensions.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: [f64; 2]) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut vals = simplex.map(&f);
    let lerp =
        |a: [f64; 2], b: [f64; 2], w: f64| [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])];

    for _ in 0..5000 {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.map(|i| simplex[i]);
        vals = order.map(|i| vals[i]);

        let size = (1..3)
            .map(|i| {
                (simplex[i][0] - simplex[0][0])
                    .abs()
                    .max((simplex[i][1] - simplex[0][1]).abs())
            })
            .fold(0.0, f64::max);
        if size < 1e-14 || vals[0] == 0.0 {
            break;
        }

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                vals[2] = fe;
            } else {
                simplex[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = if fr < vals[2] {
                lerp(centroid, reflected, 0.5)
            } else {
                lerp(centroid, simplex[2], 0.5)
            };
            let fc = f(contracted);
            if fc < vals[2].min(fr) {
                simplex[2] = contracted;
                vals[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("three vertices");
    (simplex[best], vals[best])
}
