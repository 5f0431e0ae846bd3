//! Symmetric Laurent polynomials `c0 + sum_i ci (z^i + z^-i)`.
//!
//! These double as first rows of symmetric circulant matrices: evaluating at
//! `e^{2 pi i k / N}` gives the eigenvalue at DFT position `k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative tolerance for declaring a Taylor coefficient zero.
pub const ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymLaurentPoly {
    coeffs: Vec<f64>,
}

impl SymLaurentPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        if coeffs.is_empty() {
            return Self { coeffs: vec![0.0] };
        }
        Self { coeffs }
    }

    pub fn identity() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `z + 2c + z^-1` scaled so that it reads `[2c, 1]`.
    pub fn two_tap(c0: f64, c1: f64) -> Self {
        Self {
            coeffs: vec![c0, c1],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest `T` with a stored coefficient (trailing zeros included).
    pub fn half_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Half-support ignoring trailing coefficients below `tol * max`.
    pub fn effective_half_degree(&self, tol: f64) -> usize {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0;
        }
        self.coeffs
            .iter()
            .rposition(|c| c.abs() > tol * scale)
            .unwrap_or(0)
    }

    pub fn trimmed(&self, tol: f64) -> Self {
        let t = self.effective_half_degree(tol);
        Self::new(self.coeffs[..=t].to_vec())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let mut acc = Complex64::new(self.coeffs[0], 0.0);
        let mut zp = Complex64::new(1.0, 0.0);
        let mut zm = Complex64::new(1.0, 0.0);
        for &c in &self.coeffs[1..] {
            zp *= z;
            zm *= zi;
            acc += (zp + zm) * c;
        }
        acc
    }

    /// Value at `z = e^{i theta}`; always real.
    pub fn eval_unit(&self, theta: f64) -> f64 {
        let mut acc = self.coeffs[0];
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            acc += 2.0 * c * (i as f64 * theta).cos();
        }
        acc
    }

    /// Eigenvalues of the bound `n x n` circulant, in DFT order.
    pub fn spectrum(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| self.eval_unit(2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    /// Full coefficient sequence `f[-T..=T]`.
    fn full(&self) -> Vec<f64> {
        let t = self.half_degree();
        let mut f = vec![0.0; 2 * t + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            f[t + i] = c;
            f[t - i] = c;
        }
        f
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = self.full();
        let b = other.full();
        let mut p = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                p[i + j] += x * y;
            }
        }
        let t = self.half_degree() + other.half_degree();
        Self::new(p[t..].to_vec())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0.0; len];
        for (i, v) in self.coeffs.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in other.coeffs.iter().enumerate() {
            c[i] += v;
        }
        Self::new(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `p(-z)`: coefficient `i` picks up `(-1)^i`.
    pub fn modulated(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    /// Ascending coefficients of the ordinary polynomial `z^T p(z)`.
    pub fn lift(&self) -> Vec<f64> {
        self.full()
    }

    /// First row of the `n x n` circulant; aliased taps add up.
    pub fn first_row(&self, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; n];
        let t = self.half_degree() as i64;
        let full = self.full();
        for (idx, &c) in full.iter().enumerate() {
            let m = idx as i64 - t;
            row[m.rem_euclid(n as i64) as usize] += c;
        }
        row
    }

    /// Inverse of [`first_row`] for symmetric rows. A tap at `n/2` is split
    /// between `z^{n/2}` and `z^{-n/2}`.
    pub fn from_first_row(row: &[f64], tol: f64) -> Option<Self> {
        let n = row.len();
        if n == 0 {
            return None;
        }
        let scale = row.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
        for i in 1..n {
            if (row[i] - row[n - i]).abs() > tol * scale {
                return None;
            }
        }
        let half = n / 2;
        let mut c = Vec::with_capacity(half + 1);
        c.push(row[0]);
        for (i, &r) in row.iter().enumerate().take(half + 1).skip(1) {
            if n.is_multiple_of(2) && i == half {
                c.push(r / 2.0);
            } else {
                c.push(0.5 * (r + row[n - i]));
            }
        }
        Some(Self::new(c))
    }
}

/// Dense `n x n` circulant built from a first row.
pub fn dense_circulant(row: &[f64]) -> DMatrix<f64> {
    let n = row.len();
    DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n])
}

/// Multiplicity of `z0` as a root of the lift of `p`, by repeated synthetic
/// division. Each step's remainder is the next Taylor coefficient at `z0`.
pub fn root_multiplicity(p: &SymLaurentPoly, z0: Complex64) -> usize {
    let lift: Vec<Complex64> = p.lift().iter().map(|&c| Complex64::new(c, 0.0)).collect();
    poly_root_multiplicity(&lift, z0, ROOT_TOL)
}

/// Multiplicity of `z0` as a root of the ascending-coefficient polynomial `q`.
pub fn poly_root_multiplicity(q: &[Complex64], z0: Complex64, tol: f64) -> usize {
    let scale = q.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if scale == 0.0 {
        return q.len().saturating_sub(1);
    }
    let mut cur = q.to_vec();
    let mut m = 0;
    while cur.len() > 1 {
        // Horner from the top: b_{j-1} = a_j + z0 b_j.
        let deg = cur.len() - 1;
        let mut quot = vec![Complex64::new(0.0, 0.0); deg];
        let mut acc = cur[deg];
        for j in (0..deg).rev() {
            quot[j] = acc;
            acc = cur[j] + z0 * acc;
        }
        if acc.norm() >= tol * scale {
            break;
        }
        m += 1;
        cur = quot;
    }
    m
}

/// Roots of an ascending-coefficient real polynomial via the companion matrix.
/// Leading zeros are dropped; trailing (constant-end) zeros become zero roots.
pub fn poly_roots(q: &[f64]) -> Vec<Complex64> {
    let mut hi = q.len();
    while hi > 0 && q[hi - 1] == 0.0 {
        hi -= 1;
    }
    if hi <= 1 {
        return Vec::new();
    }
    let q = &q[..hi];
    let mut zeros = 0;
    while zeros < q.len() - 1 && q[zeros] == 0.0 {
        zeros += 1;
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let r = &q[zeros..];
    let deg = r.len() - 1;
    if deg == 0 {
        return roots;
    }
    let lead = r[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -r[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    roots.extend(comp.complex_eigenvalues().iter().copied());
    roots
}

/// Evaluate an ascending-coefficient polynomial.
pub fn poly_eval(q: &[f64], z: Complex64) -> Complex64 {
    q.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}
