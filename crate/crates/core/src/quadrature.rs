//! Globally adaptive Gauss–Kronrod (7, 15) quadrature and bounded 1-D
//! maximization.
//!
//! The integrator bisects whichever panel carries the largest error
//! estimate until the summed estimate drops below
//! `max(abs_tol, rel_tol * |value|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the odd-indexed Kronrod nodes, then the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::domain(format!(
                "integrand is not finite at x = {x:e}"
            )))
        }
    };

    let fc = eval(centre)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = kronrod.abs();
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = eval(centre - dx)?;
        let f2 = eval(centre + dx)?;
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs().max(roundoff);
    Ok(Panel { a, b, value, error })
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate> {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from one panel
/// per consecutive pair of break points. Break points should sit on kinks
/// and other known non-smooth spots of the integrand.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::domain("need at least two integration limits"));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain(
            "integration break points must be strictly increasing",
        ));
    }

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        heap.push(gauss_kronrod(&f, w[0], w[1])?);
    }
    let mut subdivisions = heap.len();

    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Estimate { value, error });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::NonConvergence(format!(
                "quadrature hit {subdivisions} subdivisions with value {value:e} and error {error:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // panel cannot be split further; accept what we have
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if heap.iter().all(|p| p.error == 0.0) {
                return Ok(Estimate { value, error });
            }
            continue;
        }
        heap.push(gauss_kronrod(&f, worst.a, mid)?);
        heap.push(gauss_kronrod(&f, mid, worst.b)?);
        subdivisions += 1;
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on `[a, b]`. Returns the
/// location and value of the best point seen, endpoints included.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= x_tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    [(a, f(a)), (b, f(b)), (x1, f1), (x2, f2)]
        .into_iter()
        .filter(|(_, y)| !y.is_nan())
        .fold((a, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Bounded maximization: scan `nodes` (sorted), then polish the best node
/// with a golden-section search over its two neighbouring cells.
pub fn maximize_on_grid<F: Fn(f64) -> f64>(f: F, nodes: &[f64]) -> (f64, f64) {
    assert!(
        nodes.len() >= 2,
        "maximization grid needs at least two nodes"
    );
    let (best, _) = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, f(x)))
        .filter(|(_, y)| !y.is_nan())
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let lo = nodes[best.saturating_sub(1)];
    let hi = nodes[(best + 1).min(nodes.len() - 1)];
    let tol = 1e-15 * lo.abs().max(hi.abs()).max(1e-300);
    golden_max(&f, lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((est.value - 10.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // int_0^1 x^{-1/2} dx = 2
        let cfg = QuadConfig::with_rel_tol(1e-11);
        let est = integrate(|x| x.powf(-0.5), 0.0, 1.0, &cfg).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn kink_with_breakpoint() {
        let est = integrate_with_breaks(
            |x: f64| (x - 0.3).abs(),
            &[0.0, 0.3, 1.0],
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((est.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonfinite_integrand() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, &QuadConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn rejects_unsorted_breaks() {
        assert!(integrate_with_breaks(|x| x, &[0.0, 2.0, 1.0], &QuadConfig::default()).is_err());
    }

    #[test]
    fn golden_finds_interior_and_endpoint_maxima() {
        let (x, y) = golden_max(|x| -(x - 0.7) * (x - 0.7), 0.0, 1.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-6 && y.abs() < 1e-12);
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn grid_maximization_escapes_local_maxima() {
        let f = |x: f64| (5.0 * x).sin() + 0.5 * x;
        let nodes: Vec<f64> = (0..=350).map(|i| i as f64 * 0.01).collect();
        let (x, _) = maximize_on_grid(f, &nodes);
        // global max of sin(5x) + x/2 on [0, 3.5] sits near 5x = 2*pi*2 + acos(-0.1)
        let expected = (4.0 * std::f64::consts::PI + (-0.1f64).acos()) / 5.0;
        assert!((x - expected).abs() < 1e-6, "{x} vs {expected}");
    }
}
