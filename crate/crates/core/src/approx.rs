//! Circulant approximation of arbitrary graphs: nearest-circulant projection,
//! bandwidth-reducing relabellings, Kronecker factorization, a spectral
//! bipartition and the image-graph builder.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::circulant::{CirculantGraph, Generator};
use crate::error::{GwtError, Result};
use crate::signal::GraphSignal;

/// Symmetric, nonnegative adjacency matrix without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseGraph {
    adjacency: DMatrix<f64>,
}

impl DenseGraph {
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self> {
        if !adjacency.is_square() {
            return Err(GwtError::InvalidArgument(format!(
                "adjacency is {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        let n = adjacency.nrows();
        let scale = adjacency.amax().max(1.0);
        for i in 0..n {
            if adjacency[(i, i)].abs() > 1e-12 * scale {
                return Err(GwtError::InvalidGraph(format!("self-loop at node {i}")));
            }
            for j in 0..n {
                let v = adjacency[(i, j)];
                if !v.is_finite() || v < -1e-12 * scale {
                    return Err(GwtError::InvalidGraph(format!(
                        "negative weight at ({i}, {j})"
                    )));
                }
                if (v - adjacency[(j, i)]).abs() > 1e-12 * scale {
                    return Err(GwtError::InvalidGraph(format!(
                        "adjacency not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { adjacency })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.row_iter().map(|r| r.sum()).collect()
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| j != i && self.adjacency[(i, j)] != 0.0)
    }

    /// Connected components, each sorted ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for v in self.neighbours(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        q.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelabelMethod {
    Rcm,
    Sort,
    Identity,
}

/// `perm[new] = old`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabelling {
    pub perm: Vec<usize>,
    pub method: RelabelMethod,
}

impl Relabelling {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            method: RelabelMethod::Identity,
        }
    }

    pub fn new(perm: Vec<usize>, method: RelabelMethod) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(GwtError::InvalidArgument(
                    "relabelling is not a permutation".into(),
                ));
            }
        }
        Ok(Self { perm, method })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `P A P^T`.
    pub fn apply_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.perm.len();
        DMatrix::from_fn(n, n, |i, j| a[(self.perm[i], self.perm[j])])
    }

    pub fn apply_signal(&self, x: &GraphSignal) -> GraphSignal {
        GraphSignal::new(
            self.perm.iter().map(|&o| x.values()[o]).collect(),
            x.label(),
        )
    }

    pub fn undo_signal(&self, y: &GraphSignal) -> GraphSignal {
        let mut v = y.values().to_vec();
        for (new, &old) in self.perm.iter().enumerate() {
            v[old] = y.values()[new];
        }
        GraphSignal::new(v, y.label())
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            inv[old] = new;
        }
        inv
    }
}

/// Largest `|i - j|` over nonzero off-diagonal entries.
pub fn bandwidth(a: &DMatrix<f64>) -> usize {
    let n = a.nrows();
    let mut b = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] != 0.0 || a[(j, i)] != 0.0 {
                b = b.max(j - i);
            }
        }
    }
    b
}

/// Mean of each wrapped diagonal, symmetrized: the Frobenius projection of
/// `a` onto symmetric circulants, returned as a first row.
pub fn circulant_projection_row(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut means = vec![0.0; n];
    for (s, m) in means.iter_mut().enumerate() {
        *m = (0..n).map(|i| a[(i, (i + s) % n)]).sum::<f64>() / n as f64;
    }
    (0..n)
        .map(|s| 0.5 * (means[s] + means[(n - s) % n]))
        .collect()
}

#[derive(Clone, Debug)]
pub struct NearestCirculant {
    pub graph: CirculantGraph,
    /// Unclamped projected first row, diagonal included.
    pub row: Vec<f64>,
    /// Hops whose projected weight was negative and clamped to zero.
    pub clamped: Vec<usize>,
}

pub fn nearest_circulant(a: &DenseGraph, relabel: &Relabelling) -> Result<CirculantGraph> {
    Ok(nearest_circulant_detailed(a.adjacency(), relabel)?.graph)
}

/// Projection of a (relabelled) symmetric matrix; accepts Laplacian-like
/// input and ignores the diagonal when forming generators.
pub fn nearest_circulant_detailed(
    a: &DMatrix<f64>,
    relabel: &Relabelling,
) -> Result<NearestCirculant> {
    let n = a.nrows();
    if !a.is_square() || relabel.len() != n {
        return Err(GwtError::SizeMismatch {
            expected: n,
            got: relabel.len(),
        });
    }
    let scale = a.amax().max(1e-300);
    if (a - a.transpose()).amax() > 1e-10 * scale {
        return Err(GwtError::InvalidGraph(
            "input matrix is not symmetric".into(),
        ));
    }
    let ap = relabel.apply_matrix(a);
    let row = circulant_projection_row(&ap);
    let mut gens = Vec::new();
    let mut clamped = Vec::new();
    for (s, &w) in row.iter().enumerate().take(n / 2 + 1).skip(1) {
        if w < -1e-14 * scale {
            clamped.push(s);
        } else if w > 1e-14 * scale {
            gens.push(Generator { s, w });
        }
    }
    let graph = CirculantGraph::new(n, gens)?;
    Ok(NearestCirculant {
        graph,
        row,
        clamped,
    })
}

/// Reverse Cuthill-McKee. Falls back to the identity labelling when the
/// ordering would widen the bandwidth.
pub fn rcm_relabel(a: &DenseGraph) -> Relabelling {
    let n = a.n();
    let deg: Vec<usize> = (0..n).map(|i| a.neighbours(i).count()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !seen[i])
            .min_by_key(|&i| (deg[i], i))
            .expect("unvisited node");
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = a.neighbours(u).filter(|&v| !seen[v]).collect();
            nb.sort_by_key(|&v| (deg[v], v));
            for v in nb {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    order.reverse();
    let r = Relabelling {
        perm: order,
        method: RelabelMethod::Rcm,
    };
    if bandwidth(&r.apply_matrix(a.adjacency())) > bandwidth(a.adjacency()) {
        Relabelling::identity(n)
    } else {
        r
    }
}

/// Ascending argsort of a real signal, ties by index.
pub fn sort_relabel(x: &GraphSignal) -> Result<Relabelling> {
    if !x.is_real(0.0) {
        return Err(GwtError::InvalidArgument(
            "sort relabelling needs a real signal".into(),
        ));
    }
    let v = x.re();
    let mut perm: Vec<usize> = (0..v.len()).collect();
    perm.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    Ok(Relabelling {
        perm,
        method: RelabelMethod::Sort,
    })
}

/// `sum |x(i+1) - x(i)|`.
pub fn total_variation(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Basis of symmetric zero-diagonal circulants on `n` nodes: hop `s` gives
/// `Pi^s + Pi^-s` (a single permutation at `s = n/2`).
fn circulant_basis(n: usize) -> Vec<DMatrix<f64>> {
    (1..=n / 2)
        .map(|s| {
            DMatrix::from_fn(n, n, |i, j| {
                let d = (j + n - i) % n;
                if d == s || d == n - s {
                    1.0
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Circulant from generator coefficients on the basis above.
fn basis_matrix(n: usize, coef: &[f64]) -> DMatrix<f64> {
    let basis = circulant_basis(n);
    basis
        .iter()
        .zip(coef)
        .fold(DMatrix::zeros(n, n), |acc, (b, &c)| acc + b * c)
}

#[derive(Clone, Debug)]
pub struct KronApprox {
    /// `None` when the best factor has no positive generator, e.g. for a
    /// Cartesian product whose support no Kronecker term can reach.
    pub g1: Option<CirculantGraph>,
    pub g2: Option<CirculantGraph>,
    /// Generator coefficients before clamping (`c[s-1]` for hop `s`).
    pub coef1: Vec<f64>,
    pub coef2: Vec<f64>,
    pub residual: f64,
    /// Residual after initialization and after each ALS sweep.
    pub history: Vec<f64>,
}

fn coef_to_graph(n: usize, coef: &[f64]) -> Result<CirculantGraph> {
    let scale = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let gens: Vec<Generator> = coef
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 1e-12 * scale)
        .map(|(i, &c)| Generator { s: i + 1, w: c })
        .collect();
    CirculantGraph::new(n, gens)
}

/// Van Loan rearrangement: row `i + n1 j` holds `vec(A_ij)` for block `(i, j)`.
fn rearrange(a: &DMatrix<f64>, n1: usize, n2: usize) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(n1 * n1, n2 * n2);
    for i in 0..n1 {
        for j in 0..n1 {
            for k in 0..n2 {
                for l in 0..n2 {
                    r[(i + n1 * j, k + n2 * l)] = a[(i * n2 + k, j * n2 + l)];
                }
            }
        }
    }
    r
}

/// `A ~ A1 (x) A2` with both factors symmetric circulant adjacencies.
pub fn nearest_kron_circulant(a: &DenseGraph, n1: usize, n2: usize) -> Result<KronApprox> {
    let n = a.n();
    if n1 * n2 != n || n1 < 2 || n2 < 2 {
        return Err(GwtError::InvalidArgument(format!(
            "cannot split {n} nodes as {n1} x {n2}"
        )));
    }
    let r = rearrange(a.adjacency(), n1, n2);
    let vecs = |m: usize| -> DMatrix<f64> {
        let basis = circulant_basis(m);
        DMatrix::from_fn(m * m, basis.len(), |row, c| basis[c][(row % m, row / m)])
    };
    let u = vecs(n1);
    let v = vecs(n2);
    let uu: Vec<f64> = u.column_iter().map(|c| c.norm_squared()).collect();
    let vv: Vec<f64> = v.column_iter().map(|c| c.norm_squared()).collect();

    let residual_of = |b: &DVector<f64>, c: &DVector<f64>| -> f64 {
        let approx = (&u * b) * (&v * c).transpose();
        (&r - approx).norm()
    };

    let svd = r.clone().svd(true, true);
    let (imax, smax) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(
            (0, -1.0),
            |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
        );
    let lu = svd.u.as_ref().expect("u").column(imax).into_owned() * smax;
    let lv = svd.v_t.as_ref().expect("v").row(imax).transpose();
    let mut b = DVector::from_iterator(
        uu.len(),
        (0..uu.len()).map(|i| u.column(i).dot(&lu) / uu[i]),
    );
    let mut c = DVector::from_iterator(
        vv.len(),
        (0..vv.len()).map(|i| v.column(i).dot(&lv) / vv[i]),
    );

    let mut history = vec![residual_of(&b, &c)];
    for _ in 0..100 {
        // Each half-step is the exact least-squares update of one factor.
        let vc = &v * &c;
        let nvc = vc.norm_squared();
        if nvc > 0.0 {
            let rvc = &r * &vc;
            b = DVector::from_iterator(
                uu.len(),
                (0..uu.len()).map(|i| u.column(i).dot(&rvc) / (uu[i] * nvc)),
            );
        }
        let ub = &u * &b;
        let nub = ub.norm_squared();
        if nub > 0.0 {
            let rtub = r.transpose() * &ub;
            c = DVector::from_iterator(
                vv.len(),
                (0..vv.len()).map(|i| v.column(i).dot(&rtub) / (vv[i] * nub)),
            );
        }
        let res = residual_of(&b, &c);
        let prev = *history.last().expect("nonempty");
        history.push(res);
        if prev - res < 1e-10 {
            break;
        }
    }

    let mut b: Vec<f64> = b.iter().copied().collect();
    let mut c: Vec<f64> = c.iter().copied().collect();
    let lead = |x: &[f64]| x.iter().copied().find(|v| v.abs() > 0.0).unwrap_or(0.0);
    if lead(&b) < 0.0 {
        b.iter_mut().for_each(|x| *x = -*x);
        c.iter_mut().for_each(|x| *x = -*x);
    }
    let nb = basis_matrix(n1, &b).norm();
    let nc = basis_matrix(n2, &c).norm();
    if nb > 0.0 && nc > 0.0 {
        let s = (nb / nc).sqrt();
        b.iter_mut().for_each(|x| *x /= s);
        c.iter_mut().for_each(|x| *x *= s);
    }
    let residual = *history.last().expect("nonempty");
    Ok(KronApprox {
        g1: coef_to_graph(n1, &b).ok(),
        g2: coef_to_graph(n2, &c).ok(),
        coef1: b,
        coef2: c,
        residual,
        history,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub fiedler_value: f64,
    /// The second and third normalized-Laplacian eigenvalues coincide.
    pub degenerate: bool,
}

/// Sign split of the second eigenvector of `I - D^-1/2 A D^-1/2`.
pub fn fiedler_bipartition(a: &DenseGraph) -> Result<Bipartition> {
    let n = a.n();
    if n < 2 {
        return Err(GwtError::InvalidArgument("need at least two nodes".into()));
    }
    if !a.is_connected() {
        return Err(GwtError::Disconnected(
            "split components before partitioning".into(),
        ));
    }
    let d: Vec<f64> = a.degrees().iter().map(|x| 1.0 / x.sqrt()).collect();
    let l = DMatrix::from_fn(n, n, |i, j| {
        let v = -a.adjacency()[(i, j)] * d[i] * d[j];
        if i == j {
            1.0 + v
        } else {
            v
        }
    });
    let eig = SymmetricEigen::new(l);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let l2 = eig.eigenvalues[idx[1]];
    let degenerate = n > 2 && (eig.eigenvalues[idx[2]] - l2).abs() < 1e-8;
    let f: Vec<f64> = eig.eigenvectors.column(idx[1]).iter().copied().collect();
    let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut zeros = Vec::new();
    for (i, &v) in f.iter().enumerate() {
        if v.abs() < 1e-10 * fmax {
            zeros.push(i);
        } else if v > 0.0 {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    for z in zeros {
        if left.len() <= right.len() {
            left.push(z);
        } else {
            right.push(z);
        }
    }
    left.sort_unstable();
    right.sort_unstable();
    Ok(Bipartition {
        left,
        right,
        fiedler_value: l2,
        degenerate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageMode {
    Bilateral,
    IntensityOnly,
}

/// Gaussian pixel graph. Bilateral mode links the 8-neighbourhood;
/// intensity-only mode links every pair with `|dI| <= threshold`.
pub fn image_graph(
    intensities: &[f64],
    grid: (usize, usize),
    sigma_p: f64,
    sigma_i: Option<f64>,
    mode: ImageMode,
    threshold: Option<f64>,
) -> Result<DenseGraph> {
    let (h, w) = grid;
    let n = h * w;
    if intensities.len() != n {
        return Err(GwtError::SizeMismatch {
            expected: n,
            got: intensities.len(),
        });
    }
    let (lo, hi) = intensities
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let sigma_i = sigma_i.unwrap_or_else(|| {
        let r = hi - lo;
        if r > 0.0 {
            0.1 * r
        } else {
            1.0
        }
    });
    if !(sigma_p > 0.0) || !(sigma_i > 0.0) {
        return Err(GwtError::InvalidArgument("sigmas must be positive".into()));
    }
    if mode == ImageMode::IntensityOnly && threshold.is_none() {
        return Err(GwtError::InvalidArgument(
            "intensity-only mode needs an intensity threshold".into(),
        ));
    }
    let mut a = DMatrix::zeros(n, n);
    for p in 0..n {
        let (pr, pc) = ((p / w) as f64, (p % w) as f64);
        for q in (p + 1)..n {
            let (qr, qc) = ((q / w) as f64, (q % w) as f64);
            let dp2 = (pr - qr).powi(2) + (pc - qc).powi(2);
            let di = intensities[p] - intensities[q];
            let wi = (-(di * di) / (sigma_i * sigma_i)).exp();
            let keep_i = threshold.map(|t| di.abs() <= t).unwrap_or(true);
            let v = match mode {
                ImageMode::Bilateral => {
                    if dp2 <= 2.0 + 1e-12 && keep_i {
                        (-dp2 / (sigma_p * sigma_p)).exp() * wi
                    } else {
                        0.0
                    }
                }
                ImageMode::IntensityOnly => {
                    if keep_i {
                        wi
                    } else {
                        0.0
                    }
                }
            };
            a[(p, q)] = v;
            a[(q, p)] = v;
        }
    }
    DenseGraph::new(a)
}
