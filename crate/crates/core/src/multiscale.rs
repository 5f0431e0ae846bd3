//! Coarsening, multilevel pyramids and non-linear approximation.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{nearest_circulant_detailed, Relabelling};
use crate::circulant::{CirculantGraph, ExponentParam, Generator};
use crate::complementary::{hcgeswt, hcgswt};
use crate::error::{GwtError, Result};
use crate::filterbank::{FilterBank, Transform};
use crate::invertibility::check_invertibility;
use crate::pattern::SamplingPattern;
use crate::signal::GraphSignal;

/// Even nodes keep the low-pass.
pub fn default_pattern(n: usize) -> Result<SamplingPattern> {
    SamplingPattern::alternating(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseningStrategy {
    KeepExisting,
    PreserveSet,
    KronReduce,
}

#[derive(Clone, Debug)]
pub enum Coarsened {
    Circulant(CirculantGraph),
    /// Kron-reduced Laplacian on the even nodes.
    Dense(DMatrix<f64>),
}

fn halve(g: &CirculantGraph) -> Result<usize> {
    let n = g.n();
    if !n.is_multiple_of(2) {
        return Err(GwtError::OddSize(n));
    }
    if !g.has_unit_hop() {
        return Err(GwtError::InvalidGraph(
            "coarsening needs the unit hop s = 1".into(),
        ));
    }
    if n < 4 {
        return Err(GwtError::InvalidArgument(format!(
            "cannot coarsen a graph with {n} nodes"
        )));
    }
    Ok(n / 2)
}

/// `{s/2 : s even} U {1}` on `n/2` nodes.
pub fn keep_existing(g: &CirculantGraph) -> Result<CirculantGraph> {
    let m = halve(g)?;
    let mut gens: BTreeMap<usize, f64> = BTreeMap::new();
    for gen in g.gens() {
        if gen.s % 2 == 0 {
            gens.insert(gen.s / 2, gen.w);
        }
    }
    gens.entry(1).or_insert(1.0);
    CirculantGraph::new(
        m,
        gens.into_iter().map(|(s, w)| Generator { s, w }).collect(),
    )
}

/// Same hops on `n/2` nodes, folded into range. A hop that lands on the new
/// half-size becomes a single edge and takes weight `2w` to keep the degree.
pub fn preserve_set(g: &CirculantGraph) -> Result<CirculantGraph> {
    let m = halve(g)?;
    let mut gens: BTreeMap<usize, f64> = BTreeMap::new();
    for gen in g.gens() {
        let r = gen.s % m;
        let s = r.min(m - r);
        if s == 0 {
            continue;
        }
        let half_before = 2 * gen.s == g.n();
        let half_after = 2 * s == m;
        let w = if half_after && !half_before {
            2.0 * gen.w
        } else {
            gen.w
        };
        *gens.entry(s).or_insert(0.0) += w;
    }
    CirculantGraph::new(
        m,
        gens.into_iter().map(|(s, w)| Generator { s, w }).collect(),
    )
}

/// Schur complement of `l` onto `keep`.
pub fn kron_reduce(l: &DMatrix<f64>, keep: &[usize]) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let mut mask = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(GwtError::InvalidArgument(format!("node {k} out of range")));
        }
        mask[k] = true;
    }
    let drop: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    let a = DMatrix::from_fn(keep.len(), keep.len(), |i, j| l[(keep[i], keep[j])]);
    if drop.is_empty() {
        return Ok(a);
    }
    let b = DMatrix::from_fn(keep.len(), drop.len(), |i, j| l[(keep[i], drop[j])]);
    let c = DMatrix::from_fn(drop.len(), drop.len(), |i, j| l[(drop[i], drop[j])]);
    let Some(x) = c.clone().lu().solve(&b.transpose()) else {
        return Err(GwtError::Singular {
            condition: f64::INFINITY,
            detail: "interior block of the Kron reduction is singular".into(),
        });
    };
    Ok(a - b * x)
}

pub fn coarsen(g: &CirculantGraph, strategy: CoarseningStrategy) -> Result<Coarsened> {
    match strategy {
        CoarseningStrategy::KeepExisting => keep_existing(g).map(Coarsened::Circulant),
        CoarseningStrategy::PreserveSet => preserve_set(g).map(Coarsened::Circulant),
        CoarseningStrategy::KronReduce => {
            halve(g)?;
            let keep: Vec<usize> = (0..g.n()).step_by(2).collect();
            kron_reduce(&g.dense_laplacian(), &keep).map(Coarsened::Dense)
        }
    }
}

/// Coarsen and, for Kron reduction, project back onto circulants.
pub fn coarsen_circulant(
    g: &CirculantGraph,
    strategy: CoarseningStrategy,
) -> Result<CirculantGraph> {
    match coarsen(g, strategy)? {
        Coarsened::Circulant(c) => Ok(c),
        Coarsened::Dense(l) => {
            let a = DMatrix::from_fn(
                l.nrows(),
                l.ncols(),
                |i, j| if i == j { 0.0 } else { -l[(i, j)] },
            );
            Ok(nearest_circulant_detailed(&a, &Relabelling::identity(l.nrows()))?.graph)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankKind {
    Hgswt,
    Hgeswt,
    Hcgswt,
    Hcgeswt,
}

/// Recipe for rebuilding a bank on each level's graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSpec {
    pub kind: BankKind,
    pub k: u32,
    #[serde(default)]
    pub alphas: Vec<ExponentParam>,
    #[serde(default)]
    pub dual_moments: bool,
}

impl BankSpec {
    /// Level `j` uses the exponents scaled by `2^j`.
    pub fn build(&self, g: &CirculantGraph, level: usize) -> Result<FilterBank> {
        let f = (1u64 << level) as f64;
        let alphas: Vec<ExponentParam> = self.alphas.iter().map(|a| a.scaled(f)).collect();
        match self.kind {
            BankKind::Hgswt => FilterBank::hgswt(g, self.k),
            BankKind::Hgeswt => FilterBank::hgeswt(g, &alphas, self.k),
            BankKind::Hcgswt => hcgswt(g, self.k, self.dual_moments),
            BankKind::Hcgeswt => hcgeswt(g, &alphas, self.k, self.dual_moments),
        }
    }
}

pub trait BankBuilder {
    fn build_level(&self, g: &CirculantGraph, level: usize) -> Result<FilterBank>;
}

impl BankBuilder for BankSpec {
    fn build_level(&self, g: &CirculantGraph, level: usize) -> Result<FilterBank> {
        self.build(g, level)
    }
}

impl<F> BankBuilder for F
where
    F: Fn(&CirculantGraph, usize) -> Result<FilterBank>,
{
    fn build_level(&self, g: &CirculantGraph, level: usize) -> Result<FilterBank> {
        self(g, level)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PyramidLevel {
    pub graph: CirculantGraph,
    pub pattern: SamplingPattern,
    pub bank: FilterBank,
    pub hp_coeffs: Vec<Complex64>,
    #[serde(skip)]
    transform: Arc<Transform>,
}

impl PyramidLevel {
    pub fn transform(&self) -> &Transform {
        &self.transform
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Pyramid {
    pub strategy: CoarseningStrategy,
    pub levels: Vec<PyramidLevel>,
    pub root_lp: GraphSignal,
    /// Graph carrying `root_lp`; absent when it would have a single node.
    pub root_graph: Option<CirculantGraph>,
}

fn split_even_odd(w: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    (
        w.iter().step_by(2).copied().collect(),
        w.iter().skip(1).step_by(2).copied().collect(),
    )
}

fn interleave(lp: &[Complex64], hp: &[Complex64]) -> Vec<Complex64> {
    lp.iter().zip(hp).flat_map(|(&a, &b)| [a, b]).collect()
}

/// Per-level banks and transforms, independent of any signal.
#[derive(Clone, Debug)]
pub struct PyramidPlan {
    pub strategy: CoarseningStrategy,
    levels: Vec<PlanLevel>,
    root_graph: Option<CirculantGraph>,
    n: usize,
}

#[derive(Clone, Debug)]
struct PlanLevel {
    graph: CirculantGraph,
    transform: Arc<Transform>,
}

impl PyramidPlan {
    pub fn new(
        g: &CirculantGraph,
        builder: &dyn BankBuilder,
        strategy: CoarseningStrategy,
        levels: usize,
    ) -> Result<Self> {
        Self::build(g, builder, strategy, levels, true)
    }

    /// Skips the per-level invertibility check; inversion may then fail.
    pub fn new_unchecked(
        g: &CirculantGraph,
        builder: &dyn BankBuilder,
        strategy: CoarseningStrategy,
        levels: usize,
    ) -> Result<Self> {
        Self::build(g, builder, strategy, levels, false)
    }

    fn build(
        g: &CirculantGraph,
        builder: &dyn BankBuilder,
        strategy: CoarseningStrategy,
        levels: usize,
        check: bool,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(GwtError::InvalidArgument("need at least one level".into()));
        }
        if levels >= usize::BITS as usize || (1usize << levels) > g.n() {
            return Err(GwtError::InvalidArgument(format!(
                "{levels} levels exceed log2({})",
                g.n()
            )));
        }
        let mut graph = g.clone();
        let mut out = Vec::with_capacity(levels);
        let mut root_graph = None;
        for level in 0..levels {
            let n = graph.n();
            let pattern = default_pattern(n)?;
            let bank = builder.build_level(&graph, level)?;
            if check {
                let report = check_invertibility(&bank, &pattern);
                if !report.invertible {
                    return Err(GwtError::NotInvertible(format!(
                        "level {level}: {}",
                        report.detail
                    )));
                }
            }
            let t = Transform::new(bank, pattern)?;
            out.push(PlanLevel {
                graph: graph.clone(),
                transform: Arc::new(t),
            });
            if n / 2 >= 2 {
                graph = coarsen_circulant(&graph, strategy)?;
                root_graph = Some(graph.clone());
            } else {
                root_graph = None;
            }
        }
        Ok(Self {
            strategy,
            levels: out,
            root_graph,
            n: g.n(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn analyze(&self, x: &GraphSignal) -> Result<Pyramid> {
        x.check_len(self.n)?;
        let mut cur = x.values().to_vec();
        let mut out = Vec::with_capacity(self.levels.len());
        for l in &self.levels {
            let w = l.transform.analyze(&GraphSignal::new(cur, ""))?;
            let (lp, hp) = split_even_odd(w.values());
            out.push(PyramidLevel {
                graph: l.graph.clone(),
                pattern: l.transform.pattern().clone(),
                bank: l.transform.bank().clone(),
                hp_coeffs: hp,
                transform: l.transform.clone(),
            });
            cur = lp;
        }
        Ok(Pyramid {
            strategy: self.strategy,
            levels: out,
            root_lp: GraphSignal::new(cur, x.label()),
            root_graph: self.root_graph.clone(),
        })
    }

    /// Coefficients in the layout `[LP_J | HP_J | ... | HP_1]`.
    pub fn analyze_mallat(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let p = self.analyze(&GraphSignal::new(x.to_vec(), ""))?;
        let mut out = p.root_lp.values().to_vec();
        for l in p.levels.iter().rev() {
            out.extend_from_slice(&l.hp_coeffs);
        }
        Ok(out)
    }

    /// Inverse of [`analyze_mallat`].
    pub fn synthesize_mallat(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        if c.len() != self.n {
            return Err(GwtError::SizeMismatch {
                expected: self.n,
                got: c.len(),
            });
        }
        let mut cur = c[..self.n >> self.levels.len()].to_vec();
        let mut off = cur.len();
        for l in self.levels.iter().rev() {
            let m = cur.len();
            let hp = &c[off..off + m];
            off += m;
            let w = GraphSignal::new(interleave(&cur, hp), "");
            cur = l.transform.invert(&w)?.into_values();
        }
        Ok(cur)
    }
}

pub fn pyramid_analyze(
    g: &CirculantGraph,
    builder: &dyn BankBuilder,
    strategy: CoarseningStrategy,
    x: &GraphSignal,
    levels: usize,
) -> Result<Pyramid> {
    x.check_len(g.n())?;
    PyramidPlan::new(g, builder, strategy, levels)?.analyze(x)
}

pub fn pyramid_synthesize(p: &Pyramid) -> Result<GraphSignal> {
    let mut cur = p.root_lp.values().to_vec();
    for lvl in p.levels.iter().rev() {
        if cur.len() != lvl.hp_coeffs.len() {
            return Err(GwtError::SizeMismatch {
                expected: lvl.hp_coeffs.len(),
                got: cur.len(),
            });
        }
        let w = GraphSignal::new(interleave(&cur, &lvl.hp_coeffs), "");
        cur = lvl.transform.invert(&w)?.into_values();
    }
    Ok(GraphSignal::new(cur, p.root_lp.label()))
}

impl Pyramid {
    pub fn n(&self) -> usize {
        self.levels
            .first()
            .map(|l| l.graph.n())
            .unwrap_or(self.root_lp.len())
    }

    /// Flat coefficients: level-0 high-pass, level-1 high-pass, ..., root low-pass.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = self
            .levels
            .iter()
            .flat_map(|l| l.hp_coeffs.iter().copied())
            .collect();
        c.extend_from_slice(self.root_lp.values());
        c
    }

    /// Copy with the flat coefficient vector replaced.
    pub fn with_coefficients(&self, c: &[Complex64]) -> Result<Pyramid> {
        let total = self.coefficients().len();
        if c.len() != total {
            return Err(GwtError::SizeMismatch {
                expected: total,
                got: c.len(),
            });
        }
        let mut p = self.clone();
        let mut off = 0;
        for l in &mut p.levels {
            let m = l.hp_coeffs.len();
            l.hp_coeffs = c[off..off + m].to_vec();
            off += m;
        }
        p.root_lp = GraphSignal::new(c[off..].to_vec(), self.root_lp.label());
        Ok(p)
    }

    /// Flat coefficients of another signal under the same per-level banks.
    pub fn analyze_same(&self, x: &GraphSignal) -> Result<Vec<Complex64>> {
        x.check_len(self.n())?;
        let mut cur = x.values().to_vec();
        let mut out = Vec::with_capacity(self.n());
        for l in &self.levels {
            let w = l.transform.analyze(&GraphSignal::new(cur, ""))?;
            let (lp, hp) = split_even_odd(w.values());
            out.extend(hp);
            cur = lp;
        }
        out.extend(cur);
        Ok(out)
    }

    /// Euclidean norm of each row of the overall analysis operator.
    pub fn atom_norms(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[j] = Complex64::new(1.0, 0.0);
                self.analyze_same(&GraphSignal::new(e, ""))
            })
            .collect::<Result<_>>()?;
        Ok((0..n)
            .map(|i| cols.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt())
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NlaPoint {
    pub k: usize,
    pub snr_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NlaResult {
    pub curve: Vec<NlaPoint>,
}

/// `10 log10(||x||^2 / ||y - x||^2)`; `+inf` for exact reconstruction.
pub fn snr_db(x: &GraphSignal, y: &GraphSignal) -> f64 {
    let e: f64 = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let s: f64 = x.values().iter().map(|a| a.norm_sqr()).sum();
    if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (s / e).log10()
    }
}

/// Coefficient indices by descending magnitude against unit-norm atoms,
/// ties to the lower index.
pub fn selection_order(coeffs: &[Complex64], atom_norms: &[f64]) -> Vec<usize> {
    let score: Vec<f64> = coeffs
        .iter()
        .zip(atom_norms)
        .map(|(c, &r)| if r > 0.0 { c.norm() / r } else { 0.0 })
        .collect();
    let mut idx: Vec<usize> = (0..coeffs.len()).collect();
    idx.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    idx
}

/// Keep the `K` largest coefficients of `p` (the decomposition of `x`),
/// reconstruct, and record the SNR.
pub fn nla(x: &GraphSignal, p: &Pyramid, k_list: &[usize]) -> Result<NlaResult> {
    let coeffs = p.coefficients();
    let order = selection_order(&coeffs, &p.atom_norms()?);
    let zero = Complex64::new(0.0, 0.0);
    let curve = k_list
        .par_iter()
        .map(|&k| {
            let mut masked = vec![zero; coeffs.len()];
            for &i in order.iter().take(k) {
                masked[i] = coeffs[i];
            }
            let y = pyramid_synthesize(&p.with_coefficients(&masked)?)?;
            Ok(NlaPoint {
                k,
                snr_db: snr_db(x, &y),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NlaResult { curve })
}
