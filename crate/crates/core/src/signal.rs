//! Complex graph signals and the polynomial / exponential test generators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circulant::{ExpMode, ExponentParam};
use crate::error::{GwtError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSignal {
    values: Vec<Complex64>,
    label: String,
}

impl GraphSignal {
    pub fn new(values: Vec<Complex64>, label: impl Into<String>) -> Self {
        Self {
            values,
            label: label.into(),
        }
    }

    pub fn from_real(values: &[f64], label: impl Into<String>) -> Self {
        Self::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            label,
        )
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n], "")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - other|| / ||other||` (absolute when `other` is zero).
    pub fn rel_error(&self, other: &GraphSignal) -> f64 {
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let n = other.norm();
        if n == 0.0 {
            diff
        } else {
            diff / n
        }
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(GwtError::SizeMismatch {
                expected: n,
                got: self.len(),
            })
        }
    }
}

/// One polynomial piece starting at `start`, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyPiece {
    pub start: usize,
    pub coeffs: Vec<f64>,
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// Piecewise polynomial in the global index `t`.
pub fn poly_signal(n: usize, pieces: &[PolyPiece]) -> Result<GraphSignal> {
    if pieces.is_empty() {
        return Err(GwtError::InvalidArgument("no polynomial pieces".into()));
    }
    if pieces[0].start != 0 {
        return Err(GwtError::InvalidArgument(
            "first breakpoint must be 0".into(),
        ));
    }
    for w in pieces.windows(2) {
        if w[1].start <= w[0].start {
            return Err(GwtError::InvalidArgument(format!(
                "unordered breakpoints {} then {}",
                w[0].start, w[1].start
            )));
        }
    }
    if pieces.last().map(|p| p.start >= n).unwrap_or(false) {
        return Err(GwtError::InvalidArgument(format!(
            "breakpoint beyond signal length {n}"
        )));
    }
    let mut v = Vec::with_capacity(n);
    let mut piece = 0;
    for t in 0..n {
        while piece + 1 < pieces.len() && pieces[piece + 1].start <= t {
            piece += 1;
        }
        v.push(horner(&pieces[piece].coeffs, t as f64));
    }
    Ok(GraphSignal::from_real(&v, "poly"))
}

/// `p(j) e^{i alpha j}` (trigonometric) or `p(j) e^{alpha j}` (hyperbolic).
pub fn exp_poly_signal(n: usize, p: &ExponentParam, poly: &[f64]) -> GraphSignal {
    let v = (0..n)
        .map(|j| {
            let t = j as f64;
            let e = match p.mode {
                ExpMode::Trigonometric => Complex64::from_polar(1.0, p.alpha * t),
                ExpMode::Hyperbolic => Complex64::new((p.alpha * t).exp(), 0.0),
            };
            e * horner(poly, t)
        })
        .collect();
    GraphSignal::new(v, "exp-poly")
}
