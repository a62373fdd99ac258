//! Elementary symmetric functions and the k-Hessian operator `S_k(D^2 u)`.
//!
//! Two independent routes are kept: `S_k` of a list of eigenvalues (Vieta
//! recurrence) and `S_k` of a symmetric matrix as the sum of its `k x k`
//! principal minors. Radial fields use the closed form with eigenvalue
//! `phi''` once and `phi'/r` with multiplicity `N - 1`.

use crate::error::{Error, Result};
use crate::profile::{norm, RadialProfile};

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Err(Error::domain(format!("binomial({n}, {k}) requires k <= n")));
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).map_err(|_| Error::domain(format!("binomial({n}, {k}) overflows u64")))
}

/// `C(n, k)` as a float, zero when `k > n`.
pub(crate) fn binomial_or_zero(n: usize, k: usize) -> f64 {
    binomial(n, k).map(|b| b as f64).unwrap_or(0.0)
}

/// `k`-th elementary symmetric function of `eigs`, `S_0 = 1`.
pub fn elementary_symmetric(eigs: &[f64], k: usize) -> Result<f64> {
    if k > eigs.len() {
        return Err(Error::domain(format!(
            "elementary_symmetric: k = {k} exceeds the number of values {}",
            eigs.len()
        )));
    }
    // coefficients of prod_i (1 + lambda_i z), truncated at degree k
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (count, &lam) in eigs.iter().enumerate() {
        for j in (1..=k.min(count + 1)).rev() {
            e[j] += lam * e[j - 1];
        }
    }
    Ok(e[k])
}

/// A dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Build from rows; fails unless the rows form an exactly symmetric square matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::domain("matrix is not square"));
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::domain(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    /// Build from a function of `(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Sum of all `k x k` principal minors, which equals `S_k` of the eigenvalues.
    pub fn sum_principal_minors(&self, k: usize) -> Result<f64> {
        if k > self.dim {
            return Err(Error::domain(format!(
                "k = {k} exceeds matrix dimension {}",
                self.dim
            )));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let mut total = 0.0;
        let mut idx: Vec<usize> = (0..k).collect();
        let mut block = vec![0.0; k * k];
        loop {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    block[a * k + b] = self.get(i, j);
                }
            }
            total += determinant(&mut block, k);

            // next k-combination in lexicographic order
            let mut pos = k;
            while pos > 0 && idx[pos - 1] == self.dim - k + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for m in pos..k {
                idx[m] = idx[m - 1] + 1;
            }
        }
        Ok(total)
    }
}

/// Determinant by Gaussian elimination with partial pivoting; destroys `a`.
pub(crate) fn determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor != 0.0 {
                for c in col..n {
                    a[row * n + c] -= factor * a[col * n + c];
                }
            }
        }
    }
    det
}

fn check_order(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "k-Hessian requires 1 <= k <= N, got k = {k}, N = {n}"
        )));
    }
    Ok(())
}

/// `S_k(D^2 u)` at radius `r` for the radial field `u = phi(|x|)` in `R^N`:
/// `C(N-1, k) (phi'/r)^k + C(N-1, k-1) phi'' (phi'/r)^{k-1}`.
pub fn k_hessian_radial(profile: &RadialProfile, r: f64, n: usize, k: usize) -> Result<f64> {
    check_order(n, k)?;
    if !(r > 0.0) || !profile.contains(r) {
        let (lo, hi) = profile.domain();
        return Err(Error::domain(format!(
            "radius {r} outside profile domain ({lo}, {hi}]"
        )));
    }
    let tangential = profile.d1(r) / r;
    let normal = profile.d2(r);
    let km1 = i32::try_from(k - 1).expect("k fits in i32");
    Ok(binomial_or_zero(n - 1, k) * tangential.powi(km1 + 1)
        + binomial_or_zero(n - 1, k - 1) * normal * tangential.powi(km1))
}

/// Default finite-difference step `1e-4 * max(1, |x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-4 * norm(x).max(1.0)
}

/// Central-difference Hessian of `u` at `x`.
pub fn hessian_fd<F: Fn(&[f64]) -> f64>(u: F, x: &[f64], h: f64) -> SymmetricMatrix {
    let n = x.len();
    let u0 = u(x);
    let mut y = x.to_vec();
    let h2 = h * h;
    SymmetricMatrix::from_fn(n, |i, j| {
        if i == j {
            y[i] = x[i] + h;
            let fp = u(&y);
            y[i] = x[i] - h;
            let fm = u(&y);
            y[i] = x[i];
            (fp - 2.0 * u0 + fm) / h2
        } else {
            let mut corner = |si: f64, sj: f64| {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * h;
                let v = u(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h2)
        }
    })
}

/// `S_k(D^2 u)(x)` from a central-difference Hessian with step `h`.
pub fn k_hessian_field<F: Fn(&[f64]) -> f64>(u: F, x: &[f64], k: usize, h: f64) -> Result<f64> {
    check_order(x.len(), k)?;
    hessian_fd(u, x, h).sum_principal_minors(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(3, 1).unwrap(), 3);
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert_eq!(binomial(60, 30).unwrap(), 118_264_581_564_861_424);
        assert!(binomial(3, 4).is_err());
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        let mut row = vec![1u64];
        for n in 0..=30 {
            for (k, &b) in row.iter().enumerate() {
                assert_eq!(binomial(n, k).unwrap(), b);
            }
            let mut next = vec![1u64; n + 2];
            for k in 1..=n {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
        }
        assert_eq!(binomial(10, 5).unwrap(), 252);
    }

    #[test]
    fn elementary_symmetric_examples() {
        assert_eq!(elementary_symmetric(&[1.0, 1.0, 1.0], 2).unwrap(), 3.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 2).unwrap(), 11.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 3).unwrap(), 6.0);
        assert_eq!(elementary_symmetric(&[4.0, 5.0], 0).unwrap(), 1.0);
        assert!(elementary_symmetric(&[1.0], 2).is_err());
    }

    #[test]
    fn elementary_symmetric_matches_subset_enumeration() {
        let eigs = [0.3, -1.2, 2.5, 0.7, -0.4, 1.9];
        for k in 0..=eigs.len() {
            let mut brute = 0.0;
            for mask in 0u32..(1 << eigs.len()) {
                if mask.count_ones() as usize == k {
                    brute += (0..eigs.len())
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| eigs[i])
                        .product::<f64>();
                }
            }
            let got = elementary_symmetric(&eigs, k).unwrap();
            assert!((got - brute).abs() < 1e-12, "k = {k}: {got} vs {brute}");
        }
    }

    #[test]
    fn principal_minors_of_diagonal_matrix() {
        let m = SymmetricMatrix::from_fn(4, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        for k in 0..=4 {
            let want = elementary_symmetric(&[1.0, 2.0, 3.0, 4.0], k).unwrap();
            assert_eq!(m.sum_principal_minors(k).unwrap(), want);
        }
        assert!(m.sum_principal_minors(5).is_err());
    }

    #[test]
    fn rejects_asymmetric_rows() {
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.1, 1.0]]).is_err());
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0]]).is_err());
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(m.sum_principal_minors(2).unwrap(), -3.0);
    }

    #[test]
    fn radial_k_hessian_of_ball_base() {
        let p = RadialProfile::ball_base(1.3);
        for n in 1..=6 {
            for k in 1..=n {
                let want = binomial(n, k).unwrap() as f64;
                for &r in &[0.2, 0.9, 1.3] {
                    assert_eq!(k_hessian_radial(&p, r, n, k).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn radial_laplacian_of_exterior_base() {
        for n in 2..=6 {
            let p = RadialProfile::exterior_base(n);
            for &r in &[1.0, 1.5, 3.0, 7.0] {
                let got = k_hessian_radial(&p, r, n, 1).unwrap();
                let want = n as f64 * r.powf(-(n as f64) - 2.0);
                assert!(((got - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_identity_hessian() {
        let p = RadialProfile::new(|r| 0.5 * r * r, |r| r, |_| 1.0, 0.0, f64::INFINITY);
        for n in 1..=5 {
            assert_eq!(k_hessian_radial(&p, 2.0, n, n).unwrap(), 1.0);
        }
    }

    #[test]
    fn radial_domain_errors() {
        let p = RadialProfile::ball_base(1.0);
        assert!(k_hessian_radial(&p, 1.5, 3, 1).is_err());
        assert!(k_hessian_radial(&p, 0.0, 3, 1).is_err());
        assert!(k_hessian_radial(&p, 0.5, 3, 4).is_err());
        assert!(k_hessian_radial(&p, 0.5, 3, 0).is_err());
    }

    #[test]
    fn field_k_hessian_of_quadratic() {
        let u = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        let x = [0.3, -0.2, 0.5, 0.1];
        for k in 1..=4 {
            let got = k_hessian_field(u, &x, k, default_step(&x)).unwrap();
            let want = binomial(4, k).unwrap() as f64;
            assert!((got - want).abs() < 1e-6, "k = {k}: {got}");
        }
    }

    #[test]
    fn field_matches_radial_for_exterior_base() {
        let n = 3;
        let p = RadialProfile::exterior_base(n);
        let center = [0.0; 3];
        let u = |x: &[f64]| p.field_value(x, &center);
        let x = [1.2, -0.4, 0.9];
        let r = crate::profile::norm(&x);
        let got = k_hessian_field(u, &x, 1, default_step(&x)).unwrap();
        let want = k_hessian_radial(&p, r, n, 1).unwrap();
        assert!((got - want).abs() < 1e-5);
    }

    #[test]
    fn homogeneity_of_degree_k() {
        let p = RadialProfile::exterior_base(4);
        for gamma in [0.5, 2.0, 10.0] {
            let q = p.scaled(gamma);
            for k in 1..=4 {
                let base = k_hessian_radial(&p, 1.7, 4, k).unwrap();
                let scaled = k_hessian_radial(&q, 1.7, 4, k).unwrap();
                let want = gamma.powi(k as i32) * base;
                assert!((scaled - want).abs() <= 8.0 * f64::EPSILON * want.abs());
            }
        }
    }
}
