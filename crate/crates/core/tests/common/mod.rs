//! Independent dense references shared by the integration tests.
#![allow(dead_code)]

use gwt_core::products::ProductKind;
use gwt_core::CirculantGraph;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Adjacency built edge by edge from the generator list.
pub fn adjacency(g: &CirculantGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for gen in g.gens() {
            let j = (i + gen.s) % n;
            a[(i, j)] = gen.w;
            a[(j, i)] = gen.w;
        }
    }
    a
}

pub fn laplacian_of(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] += a.row(i).sum();
    }
    l
}

pub fn laplacian(g: &CirculantGraph) -> DMatrix<f64> {
    laplacian_of(&adjacency(g))
}

/// `L` with the diagonal replaced by `e`.
pub fn e_laplacian(g: &CirculantGraph, e: f64) -> DMatrix<f64> {
    let mut l = -adjacency(g);
    for i in 0..g.n() {
        l[(i, i)] = e;
    }
    l
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Product adjacency from Kronecker products of the factor matrices.
pub fn product_adjacency(
    kind: ProductKind,
    g1: &CirculantGraph,
    g2: &CirculantGraph,
) -> DMatrix<f64> {
    let (a1, a2) = (adjacency(g1), adjacency(g2));
    let (i1, i2) = (
        DMatrix::identity(g1.n(), g1.n()),
        DMatrix::identity(g2.n(), g2.n()),
    );
    match kind {
        ProductKind::Kronecker => kron(&a1, &a2),
        ProductKind::Cartesian => kron(&a1, &i2) + kron(&i1, &a2),
        ProductKind::Strong => kron(&a1, &a2) + kron(&a1, &i2) + kron(&i1, &a2),
        ProductKind::Lexicographic => {
            kron(&a1, &DMatrix::from_element(g2.n(), g2.n(), 1.0)) + kron(&i1, &a2)
        }
    }
}

pub fn matvec(m: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| x[j] * m[(i, j)]).sum())
        .collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn random_real(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_complex(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `sum c_j (t/n)^j`, so high degrees stay well scaled.
pub fn scaled_poly(n: usize, c: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let u = t as f64 / n as f64;
            c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
        })
        .collect()
}

/// Random connected circulant with weights in `[0.5, 2]`.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> CirculantGraph {
    loop {
        let mut gens = Vec::new();
        for s in 1..=n / 2 {
            if rng.random_bool(0.5) {
                gens.push(gwt_core::Generator {
                    s,
                    w: rng.random_range(0.5..2.0),
                });
            }
        }
        if let Ok(g) = CirculantGraph::new(n, gens) {
            if g.is_connected() {
                return g;
            }
        }
    }
}

/// Random connected circulant with every hop at most `max_hop`.
pub fn random_banded_graph(rng: &mut impl Rng, n: usize, max_hop: usize) -> CirculantGraph {
    loop {
        let mut gens = vec![gwt_core::Generator {
            s: 1,
            w: rng.random_range(0.5..2.0),
        }];
        for s in 2..=max_hop.min(n / 2) {
            if rng.random_bool(0.5) {
                gens.push(gwt_core::Generator {
                    s,
                    w: rng.random_range(0.5..2.0),
                });
            }
        }
        if let Ok(g) = CirculantGraph::new(n, gens) {
            return g;
        }
    }
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
