//! Graph products of two circulant graphs and wavelet transforms on them.
//!
//! Product signals are row-stacked: node `(i1, i2)` sits at `i1 * n2 + i2`,
//! so `x1 (x) x2` is the Kronecker product of the factor signals.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::circulant::{dft_vector, CirculantGraph, CirculantOperator, ExponentParam, Generator};
use crate::error::{GwtError, Result};
use crate::filterbank::{
    apply_real, checked_inverse, snapped_responses, SingularInfo, SplineFactor,
};
use crate::invertibility::{decide, InvertibilityReport, SpectralProblem};
use crate::multiscale::{coarsen_circulant, BankBuilder, CoarseningStrategy, PyramidPlan};
use crate::pattern::SamplingPattern;
use crate::signal::GraphSignal;

/// Products above this many nodes are only materialized on request.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Kronecker,
    Cartesian,
    Strong,
    Lexicographic,
}

impl ProductKind {
    pub const ALL: [ProductKind; 4] = [
        ProductKind::Kronecker,
        ProductKind::Cartesian,
        ProductKind::Strong,
        ProductKind::Lexicographic,
    ];

    /// Combines per-factor quantities the way degrees combine. Also gives
    /// adjacency eigenvalues, with `j2_zero` marking the constant mode of `G2`.
    pub fn combine(self, v1: f64, v2: f64, n2: usize, j2_zero: bool) -> f64 {
        match self {
            ProductKind::Kronecker => v1 * v2,
            ProductKind::Cartesian => v1 + v2,
            ProductKind::Strong => v1 * v2 + v1 + v2,
            ProductKind::Lexicographic => {
                if j2_zero {
                    v1 * n2 as f64 + v2
                } else {
                    v2
                }
            }
        }
    }

    fn degree(self, d1: f64, d2: f64, n2: usize) -> f64 {
        self.combine(d1, d2, n2, true)
    }
}

impl std::str::FromStr for ProductKind {
    type Err = GwtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kronecker" | "tensor" => Ok(ProductKind::Kronecker),
            "cartesian" => Ok(ProductKind::Cartesian),
            "strong" => Ok(ProductKind::Strong),
            "lexicographic" => Ok(ProductKind::Lexicographic),
            _ => Err(GwtError::Parse(format!("unknown product kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductGraph {
    pub kind: ProductKind,
    pub g1: CirculantGraph,
    pub g2: CirculantGraph,
}

impl ProductGraph {
    pub fn new(kind: ProductKind, g1: CirculantGraph, g2: CirculantGraph) -> Self {
        Self { kind, g1, g2 }
    }

    pub fn n1(&self) -> usize {
        self.g1.n()
    }

    pub fn n2(&self) -> usize {
        self.g2.n()
    }

    pub fn n(&self) -> usize {
        self.n1() * self.n2()
    }

    /// Every product of circulants is regular.
    pub fn degree(&self) -> f64 {
        self.kind
            .degree(self.g1.degree(), self.g2.degree(), self.n2())
    }

    /// Degree built from the factors' e-degrees.
    pub fn e_degree(&self, p1: &ExponentParam, p2: &ExponentParam) -> f64 {
        self.kind
            .degree(self.g1.e_degree(p1), self.g2.e_degree(p2), self.n2())
    }

    pub fn is_connected(&self) -> bool {
        match self.kind {
            ProductKind::Kronecker => {
                self.g1.is_connected()
                    && self.g2.is_connected()
                    && !(self.g1.is_bipartite() && self.g2.is_bipartite())
            }
            ProductKind::Cartesian | ProductKind::Strong => {
                self.g1.is_connected() && self.g2.is_connected()
            }
            ProductKind::Lexicographic => {
                self.g1.is_connected() && (self.n1() > 1 || self.g2.is_connected())
            }
        }
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(GwtError::Disconnected(format!(
                "{:?} product of these factors is disconnected",
                self.kind
            )))
        }
    }

    /// Adjacency eigenvalues at index `j1 * n2 + j2`, paired with the 2-D DFT.
    pub fn adjacency_spectrum(&self) -> Vec<f64> {
        let l1 = self.g1.adjacency_row().spectrum(self.n1());
        let l2 = self.g2.adjacency_row().spectrum(self.n2());
        let n2 = self.n2();
        l1.iter()
            .flat_map(|&a| {
                l2.iter()
                    .enumerate()
                    .map(move |(j2, &b)| self.kind.combine(a, b, n2, j2 == 0))
            })
            .collect()
    }

    pub fn adjacency(&self) -> ProductOperator {
        ProductOperator::new(self, None)
    }

    /// `D - A`.
    pub fn laplacian(&self) -> ProductOperator {
        ProductOperator::new(self, Some(self.degree()))
    }

    /// `D~ - A` with the degree combined from the factors' e-degrees.
    pub fn e_laplacian(&self, p1: &ExponentParam, p2: &ExponentParam) -> ProductOperator {
        ProductOperator::new(self, Some(self.e_degree(p1, p2)))
    }

    fn check_dense(&self, force: bool) -> Result<()> {
        if !force && self.n() > DENSE_LIMIT {
            return Err(GwtError::InvalidArgument(format!(
                "product has {} nodes, above the dense limit {DENSE_LIMIT}",
                self.n()
            )));
        }
        Ok(())
    }

    /// Dense adjacency from the Kronecker formulas.
    pub fn dense_adjacency(&self, force: bool) -> Result<DMatrix<f64>> {
        self.check_dense(force)?;
        let a1 = self.g1.dense_adjacency();
        let a2 = self.g2.dense_adjacency();
        let i1 = DMatrix::<f64>::identity(self.n1(), self.n1());
        let i2 = DMatrix::<f64>::identity(self.n2(), self.n2());
        let cart = || a1.kronecker(&i2) + i1.kronecker(&a2);
        Ok(match self.kind {
            ProductKind::Kronecker => a1.kronecker(&a2),
            ProductKind::Cartesian => cart(),
            ProductKind::Strong => a1.kronecker(&a2) + cart(),
            ProductKind::Lexicographic => {
                let j = DMatrix::<f64>::from_element(self.n2(), self.n2(), 1.0);
                a1.kronecker(&j) + i1.kronecker(&a2)
            }
        })
    }

    pub fn dense_laplacian(&self, force: bool) -> Result<DMatrix<f64>> {
        let a = self.dense_adjacency(force)?;
        Ok(DMatrix::identity(self.n(), self.n()) * self.degree() - a)
    }
}

/// `A x` or `(c I - A) x` for a product adjacency, applied through the
/// factors without forming the product matrix.
#[derive(Clone, Debug)]
pub struct ProductOperator {
    kind: ProductKind,
    n1: usize,
    n2: usize,
    a1: CirculantOperator,
    a2: CirculantOperator,
    shift: Option<f64>,
}

impl ProductOperator {
    fn new(pg: &ProductGraph, shift: Option<f64>) -> Self {
        Self {
            kind: pg.kind,
            n1: pg.n1(),
            n2: pg.n2(),
            a1: CirculantOperator::new(&pg.g1.adjacency_row(), pg.n1()),
            a2: CirculantOperator::new(&pg.g2.adjacency_row(), pg.n2()),
            shift,
        }
    }

    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    fn rows(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.chunks(self.n2)
            .flat_map(|r| self.a2.apply(r).expect("row length"))
            .collect()
    }

    fn cols(&self, x: &[Complex64]) -> Vec<Complex64> {
        map_columns(x, self.n1, self.n2, |c| {
            self.a1.apply(c).expect("column length")
        })
    }

    fn adjacency(&self, x: &[Complex64]) -> Vec<Complex64> {
        let kron = || self.cols(&self.rows(x));
        let cart = || {
            let a = self.cols(x);
            let b = self.rows(x);
            a.iter().zip(&b).map(|(p, q)| p + q).collect::<Vec<_>>()
        };
        match self.kind {
            ProductKind::Kronecker => kron(),
            ProductKind::Cartesian => cart(),
            ProductKind::Strong => kron().iter().zip(cart()).map(|(p, q)| p + q).collect(),
            ProductKind::Lexicographic => {
                let sums: Vec<Complex64> = x.chunks(self.n2).map(|r| r.iter().sum()).collect();
                let s = self.a1.apply(&sums).expect("column length");
                let b = self.rows(x);
                b.iter()
                    .enumerate()
                    .map(|(i, v)| v + s[i / self.n2])
                    .collect()
            }
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n() {
            return Err(GwtError::SizeMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        let ax = self.adjacency(x);
        Ok(match self.shift {
            None => ax,
            Some(c) => x.iter().zip(&ax).map(|(v, a)| c * v - a).collect(),
        })
    }
}

fn map_columns<F>(x: &[Complex64], n1: usize, n2: usize, f: F) -> Vec<Complex64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64> + Sync,
{
    let cols: Vec<Vec<Complex64>> = (0..n2)
        .into_par_iter()
        .map(|j| {
            let c: Vec<Complex64> = (0..n1).map(|i| x[i * n2 + j]).collect();
            f(&c)
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            out[i * n2 + j] = *v;
        }
    }
    out
}

/// Row-stacked `x1 (x) x2`.
pub fn kron_signal(x1: &[Complex64], x2: &[Complex64]) -> Vec<Complex64> {
    x1.iter()
        .flat_map(|a| x2.iter().map(move |b| a * b))
        .collect()
}

/// Generating set of the circulant isomorphic to `G1[G2]`, folded into `1..=N/2`.
pub fn lexicographic_generating_set(g1: &CirculantGraph, g2: &CirculantGraph) -> BTreeSet<usize> {
    let (n1, n2) = (g1.n(), g2.n());
    let n = n1 * n2;
    let fold = |v: usize| {
        let r = v % n;
        r.min(n - r)
    };
    let mut s = BTreeSet::new();
    for gen in g1.gens() {
        for t in 0..=(n2 - 1) / 2 {
            s.insert(fold(t * n1 + gen.s));
        }
        for t in 1..=n2 / 2 {
            s.insert(fold(t * n1 + n - gen.s));
        }
    }
    for gen in g2.gens() {
        s.insert(fold(n1 * gen.s));
    }
    s.remove(&0);
    s
}

/// Circulant form of `G1[G2]` and the relabelling `perm[i1 * n2 + i2] = i1 + n1 * i2`.
pub fn lexicographic_circulant(
    g1: &CirculantGraph,
    g2: &CirculantGraph,
) -> Result<(CirculantGraph, Vec<usize>)> {
    if !g1.has_unit_hop() {
        return Err(GwtError::InvalidGraph(
            "lexicographic isomorphism needs 1 in the first factor's generating set".into(),
        ));
    }
    let (n1, n2) = (g1.n(), g2.n());
    let n = n1 * n2;
    let r1 = g1.adjacency_row().first_row(n1);
    let r2 = g2.adjacency_row().first_row(n2);
    let weight = |d: usize| {
        if !d.is_multiple_of(n1) {
            r1[d % n1]
        } else {
            r2[d / n1]
        }
    };
    let gens: Vec<Generator> = (1..=n / 2)
        .filter_map(|s| {
            let w = weight(s);
            (w != 0.0).then_some(Generator { s, w })
        })
        .collect();
    let g = CirculantGraph::new(n, gens)?;
    let perm = (0..n).map(|i| i / n2 + n1 * (i % n2)).collect();
    Ok((g, perm))
}

/// Forward and inverse 2-D DFT on row-stacked data.
#[derive(Clone)]
struct Fft2 {
    n1: usize,
    n2: usize,
    f1: Arc<dyn rustfft::Fft<f64>>,
    f2: Arc<dyn rustfft::Fft<f64>>,
    i1: Arc<dyn rustfft::Fft<f64>>,
    i2: Arc<dyn rustfft::Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.n1, self.n2)
    }
}

impl Fft2 {
    fn new(n1: usize, n2: usize) -> Self {
        let mut p = FftPlanner::new();
        Self {
            n1,
            n2,
            f1: p.plan_fft_forward(n1),
            f2: p.plan_fft_forward(n2),
            i1: p.plan_fft_inverse(n1),
            i2: p.plan_fft_inverse(n2),
        }
    }

    fn pass(
        &self,
        x: &mut [Complex64],
        rows: &Arc<dyn rustfft::Fft<f64>>,
        cols: &Arc<dyn rustfft::Fft<f64>>,
    ) {
        for r in x.chunks_mut(self.n2) {
            rows.process(r);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.n1];
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                col[i] = x[i * self.n2 + j];
            }
            cols.process(&mut col);
            for i in 0..self.n1 {
                x[i * self.n2 + j] = col[i];
            }
        }
    }

    /// `y = F^-1 diag(eig) F x`.
    fn filter(&self, eig: &[f64], x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.pass(&mut buf, &self.f2, &self.f1);
        for (b, &l) in buf.iter_mut().zip(eig) {
            *b *= l;
        }
        self.pass(&mut buf, &self.i2, &self.i1);
        let s = 1.0 / (self.n1 * self.n2) as f64;
        buf.iter_mut().for_each(|b| *b *= s);
        buf
    }
}

/// Spline or e-spline bank built directly on a product graph.
#[derive(Clone, Debug)]
pub struct ProductBank {
    graph: ProductGraph,
    k: u32,
    factors: Vec<SplineFactor>,
    gammas: Vec<f64>,
    lp: Vec<f64>,
    hp: Vec<f64>,
    fft: Fft2,
}

/// Non-separable bank on a connected product. Exponent pairs `(alpha1, alpha2)`
/// give `beta = (e1 <> e2) / d`; an empty list gives the spline bank `beta = 1`.
pub fn nonseparable_gwt(
    pg: &ProductGraph,
    alphas: &[(ExponentParam, ExponentParam)],
    k: u32,
) -> Result<ProductBank> {
    pg.require_connected()?;
    nonseparable_gwt_unchecked(pg, alphas, k)
}

/// As [`nonseparable_gwt`] without the connectivity requirement, for
/// counting experiments on products that split into components.
pub fn nonseparable_gwt_unchecked(
    pg: &ProductGraph,
    alphas: &[(ExponentParam, ExponentParam)],
    k: u32,
) -> Result<ProductBank> {
    if k == 0 {
        return Err(GwtError::InvalidArgument(
            "order k must be at least 1".into(),
        ));
    }
    let d = pg.degree();
    if d <= 0.0 {
        return Err(GwtError::InvalidGraph("product has no edges".into()));
    }
    let factors: Vec<SplineFactor> = if alphas.is_empty() {
        vec![SplineFactor {
            beta: 1.0,
            power: k,
        }]
    } else {
        alphas
            .iter()
            .map(|(a1, a2)| SplineFactor {
                beta: pg.e_degree(a1, a2) / d,
                power: k,
            })
            .collect()
    };
    let gammas: Vec<f64> = pg.adjacency_spectrum().iter().map(|l| l / d).collect();
    let (lp, hp) = gammas
        .iter()
        .map(|&g| snapped_responses(&factors, g))
        .unzip();
    Ok(ProductBank {
        graph: pg.clone(),
        k,
        factors,
        gammas,
        lp,
        hp,
        fft: Fft2::new(pg.n1(), pg.n2()),
    })
}

impl ProductBank {
    pub fn graph(&self) -> &ProductGraph {
        &self.graph
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn betas(&self) -> Vec<f64> {
        self.factors.iter().map(|f| f.beta).collect()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn lowpass(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.fft.filter(&self.lp, x)
    }

    pub fn highpass(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.fft.filter(&self.hp, x)
    }

    fn dense_filter(&self, eig: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[j] = Complex64::new(1.0, 0.0);
                self.fft.filter(eig, &e)
            })
            .collect();
        DMatrix::from_fn(n, n, |i, j| cols[j][i].re)
    }

    pub fn analysis_matrix(&self, sp: &SamplingPattern) -> Result<DMatrix<f64>> {
        check_pattern(self.n(), sp)?;
        let l = self.dense_filter(&self.lp);
        let h = self.dense_filter(&self.hp);
        Ok(DMatrix::from_fn(self.n(), self.n(), |i, j| {
            if sp.keep_lp[i] {
                l[(i, j)]
            } else {
                h[(i, j)]
            }
        }))
    }

    /// Same cascade as for single circulants, on the product spectrum.
    pub fn check_invertibility(&self, sp: &SamplingPattern) -> Result<InvertibilityReport> {
        check_pattern(self.n(), sp)?;
        let (n1, n2) = (self.graph.n1(), self.graph.n2());
        let eig = |j: usize| {
            let a = dft_vector(n1, j / n2);
            let b = dft_vector(n2, j % n2);
            kron_signal(&a, &b)
        };
        let dense = || self.analysis_matrix(sp).expect("pattern length checked");
        Ok(decide(&SpectralProblem {
            gammas: &self.gammas,
            factors: Some(&self.factors),
            responses: self
                .lp
                .iter()
                .copied()
                .zip(self.hp.iter().copied())
                .collect(),
            keep_lp: &sp.keep_lp,
            eigvec: &eig,
            pairing: product_pairing(n1, n2, &sp.keep_lp),
            dense: &dense,
        }))
    }
}

fn check_pattern(n: usize, sp: &SamplingPattern) -> Result<()> {
    if sp.len() != n {
        return Err(GwtError::SizeMismatch {
            expected: n,
            got: sp.len(),
        });
    }
    Ok(())
}

/// Eigenvector pairing when the pattern is `+-(-1)^(a i1 + b i2)`.
fn product_pairing(n1: usize, n2: usize, keep: &[bool]) -> Option<Vec<usize>> {
    for (a, b) in [(0, 1), (1, 0), (1, 1)] {
        if (a == 1 && !n1.is_multiple_of(2)) || (b == 1 && !n2.is_multiple_of(2)) {
            continue;
        }
        let parity = |i: usize| (a * (i / n2) + b * (i % n2)).is_multiple_of(2);
        let same = keep.iter().enumerate().all(|(i, &k)| k == parity(i));
        let flipped = keep.iter().enumerate().all(|(i, &k)| k != parity(i));
        if same || flipped {
            return Some(
                (0..n1 * n2)
                    .map(|j| {
                        let j1 = (j / n2 + a * n1 / 2) % n1;
                        let j2 = (j % n2 + b * n2 / 2) % n2;
                        j1 * n2 + j2
                    })
                    .collect(),
            );
        }
    }
    None
}

/// Product bank bound to a sampling pattern on the product nodes.
#[derive(Debug)]
pub struct ProductTransform {
    bank: ProductBank,
    pattern: SamplingPattern,
    inverse: OnceLock<std::result::Result<Arc<DMatrix<f64>>, SingularInfo>>,
}

impl ProductTransform {
    pub fn new(bank: ProductBank, pattern: SamplingPattern) -> Result<Self> {
        check_pattern(bank.n(), &pattern)?;
        Ok(Self {
            bank,
            pattern,
            inverse: OnceLock::new(),
        })
    }

    pub fn bank(&self) -> &ProductBank {
        &self.bank
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn analyze(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.bank.n(), x.len())?;
        let l = self.bank.lowpass(x);
        let h = self.bank.highpass(x);
        Ok((0..x.len())
            .map(|i| if self.pattern.keep_lp[i] { l[i] } else { h[i] })
            .collect())
    }

    pub fn invert(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.bank.n(), w.len())?;
        let inv = self
            .inverse
            .get_or_init(|| {
                let m = self
                    .bank
                    .analysis_matrix(&self.pattern)
                    .map_err(|e| SingularInfo {
                        condition: f64::INFINITY,
                        detail: e.to_string(),
                    })?;
                checked_inverse(m)
            })
            .clone()
            .map_err(GwtError::from)?;
        Ok(apply_real(&inv, w))
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(GwtError::SizeMismatch { expected, got });
    }
    Ok(())
}

/// One non-separable level done factor-wise: first keep even `i2`, then
/// coarsen `G2` and keep even `i1` on the re-formed product.
#[derive(Clone, Debug, Serialize)]
pub struct TwoStageLevel {
    /// High-pass of the first stage on `(i1, odd i2)`, `n1 x n2/2`.
    pub hp1: Vec<Complex64>,
    /// High-pass of the second stage on `(odd i1, t)`, `n1/2 x n2/2`.
    pub hp2: Vec<Complex64>,
    /// Low-pass on `(even i1, t)`, `n1/2 x n2/2`.
    pub lp: Vec<Complex64>,
    pub coarse_g2: CirculantGraph,
}

pub fn nonseparable_two_stage(
    pg: &ProductGraph,
    k: u32,
    strategy: CoarseningStrategy,
    x: &[Complex64],
    require_connected: bool,
) -> Result<TwoStageLevel> {
    let build = |g: &ProductGraph| {
        if require_connected {
            nonseparable_gwt(g, &[], k)
        } else {
            nonseparable_gwt_unchecked(g, &[], k)
        }
    };
    let (n1, n2) = (pg.n1(), pg.n2());
    if n1 % 2 != 0 || n2 % 2 != 0 {
        return Err(GwtError::OddSize(if n1 % 2 != 0 { n1 } else { n2 }));
    }
    check_len(pg.n(), x.len())?;
    let keep1: Vec<bool> = (0..pg.n()).map(|i| (i % n2) % 2 == 0).collect();
    let t1 = ProductTransform::new(build(pg)?, SamplingPattern::new(keep1))?;
    let w1 = t1.analyze(x)?;
    let lp1: Vec<Complex64> = w1
        .iter()
        .enumerate()
        .filter(|(i, _)| (i % n2) % 2 == 0)
        .map(|(_, v)| *v)
        .collect();
    let hp1 = w1
        .iter()
        .enumerate()
        .filter(|(i, _)| (i % n2) % 2 == 1)
        .map(|(_, v)| *v)
        .collect();

    let coarse_g2 = coarsen_circulant(&pg.g2, strategy)?;
    let pg2 = ProductGraph::new(pg.kind, pg.g1.clone(), coarse_g2.clone());
    let m2 = n2 / 2;
    let keep2: Vec<bool> = (0..pg2.n()).map(|i| (i / m2) % 2 == 0).collect();
    let t2 = ProductTransform::new(build(&pg2)?, SamplingPattern::new(keep2))?;
    let w2 = t2.analyze(&lp1)?;
    let lp = w2
        .iter()
        .enumerate()
        .filter(|(i, _)| (i / m2) % 2 == 0)
        .map(|(_, v)| *v)
        .collect();
    let hp2 = w2
        .iter()
        .enumerate()
        .filter(|(i, _)| (i / m2) % 2 == 1)
        .map(|(_, v)| *v)
        .collect();
    Ok(TwoStageLevel {
        hp1,
        hp2,
        lp,
        coarse_g2,
    })
}

/// Separable transform: a multilevel pyramid per factor, applied to the rows
/// and then the columns of the `n1 x n2` unstacking.
#[derive(Clone, Debug)]
pub struct SeparableTransform {
    p1: PyramidPlan,
    p2: PyramidPlan,
}

impl SeparableTransform {
    pub fn new(p1: PyramidPlan, p2: PyramidPlan) -> Self {
        Self { p1, p2 }
    }

    pub fn build(
        g1: &CirculantGraph,
        b1: &dyn BankBuilder,
        g2: &CirculantGraph,
        b2: &dyn BankBuilder,
        strategy: CoarseningStrategy,
        levels: usize,
    ) -> Result<Self> {
        Ok(Self {
            p1: PyramidPlan::new(g1, b1, strategy, levels)?,
            p2: PyramidPlan::new(g2, b2, strategy, levels)?,
        })
    }

    pub fn n(&self) -> usize {
        self.p1.n() * self.p2.n()
    }

    /// `vec_r(M1 X M2^T)` with each `M_i` the factor pyramid in the layout
    /// `[LP_J | HP_J | ... | HP_1]`.
    pub fn analyze(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n(), x.len())?;
        let (n1, n2) = (self.p1.n(), self.p2.n());
        let rows: Vec<Vec<Complex64>> = x
            .par_chunks(n2)
            .map(|r| self.p2.analyze_mallat(r))
            .collect::<Result<_>>()?;
        let y: Vec<Complex64> = rows.into_iter().flatten().collect();
        try_map_columns(&y, n1, n2, |c| self.p1.analyze_mallat(c))
    }

    pub fn synthesize(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n(), c.len())?;
        let (n1, n2) = (self.p1.n(), self.p2.n());
        let y = try_map_columns(c, n1, n2, |col| self.p1.synthesize_mallat(col))?;
        let rows: Vec<Vec<Complex64>> = y
            .par_chunks(n2)
            .map(|r| self.p2.synthesize_mallat(r))
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }
}

fn try_map_columns<F>(x: &[Complex64], n1: usize, n2: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + Sync,
{
    let err = std::sync::Mutex::new(None);
    let out = map_columns(x, n1, n2, |c| match f(c) {
        Ok(v) => v,
        Err(e) => {
            *err.lock().unwrap() = Some(e);
            vec![Complex64::new(0.0, 0.0); n1]
        }
    });
    match err.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn separable_analyze(t: &SeparableTransform, x: &GraphSignal) -> Result<GraphSignal> {
    Ok(GraphSignal::new(t.analyze(x.values())?, x.label()))
}

pub fn separable_synthesize(t: &SeparableTransform, c: &GraphSignal) -> Result<GraphSignal> {
    Ok(GraphSignal::new(t.synthesize(c.values())?, c.label()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub kind: ProductKind,
    pub direct: f64,
    pub predicted: f64,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn laplacian_form(g: &CirculantGraph, x: &[f64]) -> Result<f64> {
    let c: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let lx = CirculantOperator::new(&g.laplacian_row(), g.n()).apply(&c)?;
    Ok(x.iter().zip(&lx).map(|(a, b)| a * b.re).sum())
}

/// `x^T L x` for `x = x1 (x) x2`, directly and from the factor quantities.
pub fn smoothness_identity(
    kind: ProductKind,
    g1: &CirculantGraph,
    g2: &CirculantGraph,
    x1: &[f64],
    x2: &[f64],
) -> Result<SmoothnessReport> {
    check_len(g1.n(), x1.len())?;
    check_len(g2.n(), x2.len())?;
    let pg = ProductGraph::new(kind, g1.clone(), g2.clone());
    let xc: Vec<Complex64> = x1
        .iter()
        .flat_map(|a| x2.iter().map(move |b| Complex64::new(a * b, 0.0)))
        .collect();
    let lx = pg.laplacian().apply(&xc)?;
    let direct: f64 = xc.iter().zip(&lx).map(|(a, b)| a.re * b.re).sum();

    let (s1, s2) = (laplacian_form(g1, x1)?, laplacian_form(g2, x2)?);
    let (a1, a2) = (dot(x1, x1), dot(x2, x2));
    let (d1, d2) = (g1.degree(), g2.degree());
    let kron = d2 * s1 * a2 + d1 * s2 * a1 - s1 * s2;
    let cart = s1 * a2 + s2 * a1;
    let predicted = match kind {
        ProductKind::Kronecker => kron,
        ProductKind::Cartesian => cart,
        ProductKind::Strong => kron + cart,
        ProductKind::Lexicographic => {
            let c2: f64 = x2.iter().sum();
            a1 * s2 + s1 * c2 * c2 + d1 * a1 * (g2.n() as f64 * a2 - c2 * c2)
        }
    };
    Ok(SmoothnessReport {
        kind,
        direct,
        predicted,
        residual: (direct - predicted).abs() / direct.abs().max(1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionReport {
    pub kind: ProductKind,
    /// Largest entry of the product Laplacian applied to `x1 (x) x2`.
    pub direct_max: f64,
    pub residual: f64,
}

/// Checks `L (x1 (x) x2)` against its expression in factor Laplacians. With
/// `params`, every degree is replaced by the matching e-degree.
pub fn laplacian_action_identity(
    kind: ProductKind,
    g1: &CirculantGraph,
    g2: &CirculantGraph,
    x1: &[Complex64],
    x2: &[Complex64],
    params: Option<(ExponentParam, ExponentParam)>,
) -> Result<ActionReport> {
    check_len(g1.n(), x1.len())?;
    check_len(g2.n(), x2.len())?;
    let pg = ProductGraph::new(kind, g1.clone(), g2.clone());
    let (e1, e2, op) = match &params {
        None => (g1.degree(), g2.degree(), pg.laplacian()),
        Some((p1, p2)) => (g1.e_degree(p1), g2.e_degree(p2), pg.e_laplacian(p1, p2)),
    };
    let x = kron_signal(x1, x2);
    let direct = op.apply(&x)?;

    let lap = |g: &CirculantGraph, e: f64, v: &[Complex64]| -> Result<Vec<Complex64>> {
        let av = CirculantOperator::new(&g.adjacency_row(), g.n()).apply(v)?;
        Ok(v.iter().zip(&av).map(|(a, b)| e * a - b).collect())
    };
    let l1 = lap(g1, e1, x1)?;
    let l2 = lap(g2, e2, x2)?;
    let kron = || {
        let a = kron_signal(&l1, x2);
        let b = kron_signal(x1, &l2);
        let c = kron_signal(&l1, &l2);
        (0..x.len())
            .map(|i| e2 * a[i] + e1 * b[i] - c[i])
            .collect::<Vec<_>>()
    };
    let cart = || {
        let a = kron_signal(&l1, x2);
        let b = kron_signal(x1, &l2);
        a.iter().zip(&b).map(|(p, q)| p + q).collect::<Vec<_>>()
    };
    let predicted: Vec<Complex64> = match kind {
        ProductKind::Kronecker => kron(),
        ProductKind::Cartesian => cart(),
        ProductKind::Strong => kron().iter().zip(cart()).map(|(p, q)| p + q).collect(),
        ProductKind::Lexicographic => {
            let c2: Complex64 = x2.iter().sum();
            let n2 = g2.n() as f64;
            let ones = vec![Complex64::new(1.0, 0.0); g2.n()];
            let a = kron_signal(x1, &l2);
            let b = kron_signal(&l1, &ones);
            let shifted: Vec<Complex64> = x2.iter().map(|v| n2 * v - c2).collect();
            let c = kron_signal(x1, &shifted);
            (0..x.len()).map(|i| a[i] + c2 * b[i] + e1 * c[i]).collect()
        }
    };
    let direct_max = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = direct
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(ActionReport {
        kind,
        direct_max,
        residual: diff / direct_max.max(1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example1Counts {
    pub n1: usize,
    pub n2: usize,
    pub m1: usize,
    pub m2: usize,
    pub sep_formula: f64,
    pub sep_empirical: usize,
    pub nonsep_l1_formula: f64,
    pub nonsep_l1_empirical: usize,
    pub nonsep_l2_formula: f64,
    pub nonsep_l2_empirical: usize,
    /// Zeros among the final low-pass coefficients; zero for ramps.
    pub nonsep_lp_zeros: usize,
}

impl Example1Counts {
    pub fn nonsep_formula(&self) -> f64 {
        self.nonsep_l1_formula + self.nonsep_l2_formula
    }

    pub fn nonsep_empirical(&self) -> usize {
        self.nonsep_l1_empirical + self.nonsep_l2_empirical
    }

    pub fn matches(&self) -> bool {
        self.sep_formula == self.sep_empirical as f64
            && self.nonsep_l1_formula == self.nonsep_l1_empirical as f64
            && self.nonsep_l2_formula == self.nonsep_l2_empirical as f64
    }
}

/// Zero threshold used when counting coefficients.
pub const ZERO_TOL: f64 = 1e-9;

fn count_zeros(v: &[Complex64]) -> usize {
    v.iter().filter(|c| c.norm() <= ZERO_TOL).count()
}

/// Zero counts of one-level separable and non-separable first-order spline
/// transforms of a ramp tensor signal on banded cycles, next to the closed
/// forms.
pub fn example1_counts(n1: usize, n2: usize, m1: usize, m2: usize) -> Result<Example1Counts> {
    let band = |n: usize, m: usize| {
        if m == 0 || 2 * m > n {
            return Err(GwtError::InvalidArgument(format!(
                "bandwidth {m} invalid for {n} nodes"
            )));
        }
        CirculantGraph::unweighted(n, &(1..=m).collect::<Vec<_>>())
    };
    let g1 = band(n1, m1)?;
    let g2 = band(n2, m2)?;
    let ramp = |n: usize, a: f64, b: f64| -> Vec<Complex64> {
        (0..n)
            .map(|t| Complex64::new(a + b * t as f64, 0.0))
            .collect()
    };
    let x = kron_signal(&ramp(n1, 1.0, 1.0), &ramp(n2, 2.0, 3.0));

    let spline = |g: &CirculantGraph, _level: usize| crate::filterbank::FilterBank::hgswt(g, 1);
    let sep = SeparableTransform::build(
        &g1,
        &spline,
        &g2,
        &spline,
        CoarseningStrategy::PreserveSet,
        1,
    )?;
    let c = sep.analyze(&x)?;

    let pg = ProductGraph::new(ProductKind::Kronecker, g1, g2);
    let two = nonseparable_two_stage(&pg, 1, CoarseningStrategy::PreserveSet, &x, false)?;

    let (f1, f2, fm1, fm2) = (n1 as f64, n2 as f64, m1 as f64, m2 as f64);
    Ok(Example1Counts {
        n1,
        n2,
        m1,
        m2,
        sep_formula: 0.75 * f1 * f2 - 0.5 * (2.0 * fm1 * fm2 + fm1 * f2 + fm2 * f1),
        sep_empirical: count_zeros(&c),
        nonsep_l1_formula: 0.5 * f1 * f2 - (fm1 * f2 + fm2 * f1 - 2.0 * fm1 * fm2),
        nonsep_l1_empirical: count_zeros(&two.hp1),
        nonsep_l2_formula: 0.25 * f1 * f2 - (1.5 * f1 * fm2 + fm1 * f2 - 6.0 * fm1 * fm2),
        nonsep_l2_empirical: count_zeros(&two.hp2),
        nonsep_lp_zeros: count_zeros(&two.lp),
    })
}
