//! Circulant graphs, their Laplacians and FFT-diagonalized circulant algebra.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GwtError, Result};
use crate::laurent::SymLaurentPoly;
use crate::signal::GraphSignal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub s: usize,
    pub w: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphSpec {
    n: usize,
    gens: Vec<Generator>,
}

/// Circulant graph on `n` nodes: `i ~ i +- s` with weight `w` for each generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec", into = "GraphSpec")]
pub struct CirculantGraph {
    n: usize,
    gens: Vec<Generator>,
    degree: f64,
    connected: bool,
}

impl TryFrom<GraphSpec> for CirculantGraph {
    type Error = GwtError;
    fn try_from(spec: GraphSpec) -> Result<Self> {
        CirculantGraph::new(spec.n, spec.gens)
    }
}

impl From<CirculantGraph> for GraphSpec {
    fn from(g: CirculantGraph) -> Self {
        GraphSpec {
            n: g.n,
            gens: g.gens,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl CirculantGraph {
    pub fn new(n: usize, mut gens: Vec<Generator>) -> Result<Self> {
        if n < 2 {
            return Err(GwtError::InvalidGraph(format!(
                "n = {n} must be at least 2"
            )));
        }
        if gens.is_empty() {
            return Err(GwtError::InvalidGraph("empty generating set".into()));
        }
        gens.sort_by_key(|g| g.s);
        for pair in gens.windows(2) {
            if pair[0].s == pair[1].s {
                return Err(GwtError::InvalidGraph(format!(
                    "duplicate generator s = {}",
                    pair[0].s
                )));
            }
        }
        for g in &gens {
            if g.s < 1 || g.s > n / 2 {
                return Err(GwtError::InvalidGraph(format!(
                    "generator s = {} outside 1..={}",
                    g.s,
                    n / 2
                )));
            }
            if !(g.w > 0.0) || !g.w.is_finite() {
                return Err(GwtError::InvalidGraph(format!(
                    "generator s = {} has nonpositive weight {}",
                    g.s, g.w
                )));
            }
        }
        let degree = gens
            .iter()
            .map(|g| if 2 * g.s == n { g.w } else { 2.0 * g.w })
            .sum();
        let connected = gens.iter().fold(n, |acc, g| gcd(acc, g.s)) == 1;
        Ok(Self {
            n,
            gens,
            degree,
            connected,
        })
    }

    /// Unit-weight graph from hop distances.
    pub fn unweighted(n: usize, hops: &[usize]) -> Result<Self> {
        Self::new(n, hops.iter().map(|&s| Generator { s, w: 1.0 }).collect())
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::unweighted(n, &[1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn has_unit_hop(&self) -> bool {
        self.gens.iter().any(|g| g.s == 1)
    }

    /// All hops odd and `n` even.
    pub fn is_bipartite(&self) -> bool {
        self.n.is_multiple_of(2) && self.gens.iter().all(|g| g.s % 2 == 1)
    }

    /// Bandwidth `M = max s`.
    pub fn max_hop(&self) -> usize {
        self.gens.iter().map(|g| g.s).max().unwrap_or(0)
    }

    fn hop_poly(&self, f: impl Fn(&Generator) -> f64) -> SymLaurentPoly {
        let mut c = vec![0.0; self.max_hop() + 1];
        for g in &self.gens {
            let v = f(g);
            c[g.s] += if 2 * g.s == self.n { v / 2.0 } else { v };
        }
        SymLaurentPoly::new(c)
    }

    pub fn adjacency_row(&self) -> SymLaurentPoly {
        self.hop_poly(|g| g.w)
    }

    /// `A / d`.
    pub fn normalized_adjacency_row(&self) -> SymLaurentPoly {
        self.adjacency_row().scale(1.0 / self.degree)
    }

    pub fn laplacian_row(&self) -> SymLaurentPoly {
        let mut p = self.hop_poly(|g| -g.w);
        let mut c = p.coeffs().to_vec();
        c[0] = self.degree;
        p = SymLaurentPoly::new(c);
        p
    }

    /// `sum 2 w cos(alpha s)` (or cosh), half generator counted once.
    pub fn e_degree(&self, p: &ExponentParam) -> f64 {
        self.gens
            .iter()
            .map(|g| {
                let k = p.kernel(g.s as f64);
                if 2 * g.s == self.n {
                    g.w * k
                } else {
                    2.0 * g.w * k
                }
            })
            .sum()
    }

    pub fn e_laplacian_row(&self, p: &ExponentParam) -> ELaplacianRow {
        let e = self.e_degree(p);
        let mut c = self.hop_poly(|g| -g.w).coeffs().to_vec();
        c[0] = e;
        ELaplacianRow {
            row: SymLaurentPoly::new(c),
            e_degree: e,
            degenerate: e.abs() <= 1e-12 * self.degree,
        }
    }

    /// Eigenvalues of `A / d` in DFT order.
    pub fn normalized_spectrum(&self) -> Vec<f64> {
        self.normalized_adjacency_row().spectrum(self.n)
    }

    pub fn dense_adjacency(&self) -> DMatrix<f64> {
        crate::laurent::dense_circulant(&self.adjacency_row().first_row(self.n))
    }

    pub fn dense_laplacian(&self) -> DMatrix<f64> {
        crate::laurent::dense_circulant(&self.laplacian_row().first_row(self.n))
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.connected {
            Ok(())
        } else {
            let hops: Vec<usize> = self.gens.iter().map(|g| g.s).collect();
            Err(GwtError::Disconnected(format!(
                "gcd({}, {:?}) > 1",
                self.n, hops
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ELaplacianRow {
    pub row: SymLaurentPoly,
    pub e_degree: f64,
    /// The e-degree vanished; filters built from it may not be invertible.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpMode {
    Trigonometric,
    Hyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentParam {
    pub mode: ExpMode,
    pub alpha: f64,
}

impl ExponentParam {
    pub fn trig(alpha: f64) -> Self {
        Self {
            mode: ExpMode::Trigonometric,
            alpha,
        }
    }

    pub fn hyperbolic(alpha: f64) -> Self {
        Self {
            mode: ExpMode::Hyperbolic,
            alpha,
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            mode: self.mode,
            alpha: self.alpha * f,
        }
    }

    /// `cos(alpha t)` or `cosh(alpha t)`.
    pub fn kernel(&self, t: f64) -> f64 {
        match self.mode {
            ExpMode::Trigonometric => (self.alpha * t).cos(),
            ExpMode::Hyperbolic => (self.alpha * t).cosh(),
        }
    }

    /// `e^{i alpha}` or `e^{alpha}`.
    pub fn base(&self) -> Complex64 {
        match self.mode {
            ExpMode::Trigonometric => Complex64::from_polar(1.0, self.alpha),
            ExpMode::Hyperbolic => Complex64::new(self.alpha.exp(), 0.0),
        }
    }
}

/// A circulant matrix held by its eigenvalues; applies in `O(N log N)`.
#[derive(Clone)]
pub struct CirculantOperator {
    n: usize,
    eigenvalues: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantOperator")
            .field("n", &self.n)
            .finish()
    }
}

impl CirculantOperator {
    pub fn new(row: &SymLaurentPoly, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            eigenvalues: row.spectrum(n),
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(GwtError::SizeMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut buf = x.to_vec();
        self.fft.process(&mut buf);
        for (b, &l) in buf.iter_mut().zip(&self.eigenvalues) {
            *b *= l;
        }
        self.ifft.process(&mut buf);
        let s = 1.0 / self.n as f64;
        for b in &mut buf {
            *b *= s;
        }
        Ok(buf)
    }
}

/// `y = C x` for the symmetric circulant `C` with first row `row`.
pub fn apply_circulant(row: &SymLaurentPoly, x: &GraphSignal) -> Result<GraphSignal> {
    let op = CirculantOperator::new(row, x.len());
    Ok(GraphSignal::new(op.apply(x.values())?, x.label()))
}

/// Unit-norm DFT eigenvector `u_j(m) = e^{2 pi i j m / N} / sqrt(N)`.
pub fn dft_vector(n: usize, j: usize) -> Vec<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|m| Complex64::from_polar(s, 2.0 * PI * ((j * m) % n) as f64 / n as f64))
        .collect()
}
