//! k-Hessian identities: principal minors against eigenvalues from an
//! independent characteristic-polynomial solver, finite differences against
//! the radial formula, and homogeneity.

#![allow(clippy::needless_range_loop)]

use nlod_core::hessian::{
    elementary_symmetric, k_hessian_field, k_hessian_radial, SymmetricMatrix,
};
use nlod_core::RadialProfile;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

/// Eigenvalues of a symmetric matrix as sign changes of `det(A - x I)` on a
/// fine scan of the Gershgorin interval, refined by bisection.
fn eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let radius = rows
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let charpoly = |x: f64| {
        let mut m = rows.to_vec();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= x;
        }
        det(m)
    };
    let steps = 20_000;
    let mut roots = Vec::new();
    let mut prev = (-radius, charpoly(-radius));
    for i in 1..=steps {
        let x = -radius + 2.0 * radius * i as f64 / steps as f64;
        let fx = charpoly(x);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1.signum() != fx.signum() && fx != 0.0 {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if charpoly(m).signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (x, fx);
    }
    assert_eq!(roots.len(), n, "eigenvalue scan lost a root");
    roots
}

#[test]
fn principal_minor_sums_are_symmetric_functions_of_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=5 {
        for _ in 0..10 {
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-3.0..3.0);
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let eigs = eigenvalues(&rows);
            let m = SymmetricMatrix::from_rows(&rows).unwrap();
            for k in 1..=n {
                let minors = m.sum_principal_minors(k).unwrap();
                let sym = elementary_symmetric(&eigs, k).unwrap();
                assert!(
                    (minors - sym).abs() <= 1e-8 * sym.abs().max(1.0),
                    "n={n} k={k}: {minors} vs {sym}"
                );
            }
        }
    }
}

fn wavy_profile() -> RadialProfile {
    RadialProfile::new(
        |r: f64| (1.3 * r).sin() + 0.2 * r * r * r,
        |r: f64| 1.3 * (1.3 * r).cos() + 0.6 * r * r,
        |r: f64| -1.69 * (1.3 * r).sin() + 1.2 * r,
        0.0,
        10.0,
    )
}

#[test]
fn finite_difference_field_converges_at_second_order() {
    let profiles = [
        (wavy_profile(), 1.7),
        (RadialProfile::exterior_base(3), 1.9),
        (RadialProfile::exterior_base(5), 1.4),
    ];
    for (profile, r) in &profiles {
        for n in [3usize, 5] {
            let field = |x: &[f64]| profile.value(x.iter().map(|v| v * v).sum::<f64>().sqrt());
            let dir: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x: Vec<f64> = dir.iter().map(|v| r * v / len).collect();
            for k in 1..=n {
                let exact = k_hessian_radial(profile, *r, n, k).unwrap();
                let e1 = (k_hessian_field(field, &x, k, 4e-3).unwrap() - exact).abs();
                let e2 = (k_hessian_field(field, &x, k, 2e-3).unwrap() - exact).abs();
                let ratio = e1 / e2;
                assert!(e2 < 1e-4, "n={n} k={k}: error {e2}");
                assert!(
                    (3.0..5.0).contains(&ratio),
                    "n={n} k={k}: halving ratio {ratio}"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn radial_k_hessian_is_homogeneous(n in 2usize..=8, kk in 1usize..=8, r in 0.05f64..9.5) {
        let k = kk.min(n);
        let base = wavy_profile();
        let s = k_hessian_radial(&base, r, n, k).unwrap();
        for gamma in [0.5f64, 2.0, 10.0] {
            let scaled = k_hessian_radial(&base.scaled(gamma), r, n, k).unwrap();
            let want = gamma.powi(k as i32) * s;
            prop_assert!((scaled - want).abs() <= 64.0 * f64::EPSILON * want.abs().max(f64::MIN_POSITIVE));
        }
    }
}
