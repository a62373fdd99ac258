//! Radial functions `u(x) = phi(|x - x0|)` with their first two derivatives.

use std::fmt;
use std::sync::Arc;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial profile `phi` on `(r_min, r_max)`, `0 <= r_min < r_max <= inf`,
/// together with `phi'` and `phi''`.
#[derive(Clone)]
pub struct RadialProfile {
    phi: RadialFn,
    dphi: RadialFn,
    d2phi: RadialFn,
    r_min: f64,
    r_max: f64,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    pub fn new<F, G, H>(phi: F, dphi: G, d2phi: H, r_min: f64, r_max: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        assert!(
            r_min >= 0.0 && r_min < r_max,
            "radial domain must satisfy 0 <= r_min < r_max, got ({r_min}, {r_max})"
        );
        Self {
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            d2phi: Arc::new(d2phi),
            r_min,
            r_max,
        }
    }

    /// `(r^2 - R^2) / 2` on `[0, R]`.
    pub fn ball_base(radius: f64) -> Self {
        let r2 = radius * radius;
        Self::new(move |r| 0.5 * (r * r - r2), |r| r, |_| 1.0, 0.0, radius)
    }

    /// `(r^{-N} - r^{2-N}) / 2` on `[1, inf)`.
    pub fn exterior_base(n: usize) -> Self {
        let nf = n as f64;
        Self::new(
            move |r: f64| 0.5 * (r.powf(-nf) - r.powf(2.0 - nf)),
            move |r: f64| 0.5 * (-nf * r.powf(-nf - 1.0) + (nf - 2.0) * r.powf(1.0 - nf)),
            move |r: f64| {
                0.5 * (nf * (nf + 1.0) * r.powf(-nf - 2.0) - (nf - 2.0) * (nf - 1.0) * r.powf(-nf))
            },
            1.0,
            f64::INFINITY,
        )
    }

    /// `gamma * phi`.
    pub fn scaled(&self, gamma: f64) -> Self {
        let (p, d, dd) = (self.phi.clone(), self.dphi.clone(), self.d2phi.clone());
        Self {
            phi: Arc::new(move |r| gamma * p(r)),
            dphi: Arc::new(move |r| gamma * d(r)),
            d2phi: Arc::new(move |r| gamma * dd(r)),
            r_min: self.r_min,
            r_max: self.r_max,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.phi)(r)
    }

    pub fn d1(&self, r: f64) -> f64 {
        (self.dphi)(r)
    }

    pub fn d2(&self, r: f64) -> f64 {
        (self.d2phi)(r)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    /// Closed-interval membership test.
    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    /// Evaluate the induced field `phi(|x - center|)`.
    pub fn field_value(&self, x: &[f64], center: &[f64]) -> f64 {
        self.value(distance(x, center))
    }

    /// Gradient `phi'(r) (x - center) / r` of the induced field; zero at the centre.
    pub fn field_gradient(&self, x: &[f64], center: &[f64]) -> Vec<f64> {
        let r = distance(x, center);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let scale = self.d1(r) / r;
        x.iter().zip(center).map(|(a, b)| scale * (a - b)).collect()
    }
}

pub(crate) fn distance(x: &[f64], center: &[f64]) -> f64 {
    x.iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}
