//! Graph spline and e-spline wavelet filterbanks and the two-channel transform.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::circulant::{CirculantGraph, CirculantOperator, ExpMode, ExponentParam};
use crate::error::{GwtError, Result};
use crate::laurent::{root_multiplicity, SymLaurentPoly};
use crate::pattern::SamplingPattern;
use crate::signal::GraphSignal;

/// Two values of `|beta|` and `|gamma|` closer than this are a collision.
pub const COLLISION_TOL: f64 = 1e-9;

/// Largest condition number accepted by the dense inverse.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spline,
    Complementary,
}

/// One factor `((beta I +- A/d) / 2)^power`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplineFactor {
    pub beta: f64,
    pub power: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterBank {
    #[serde(skip)]
    graph: CirculantGraph,
    k: u32,
    alphas: Vec<ExponentParam>,
    #[serde(skip)]
    factors: Vec<SplineFactor>,
    betas: Vec<f64>,
    powers: Vec<u32>,
    family: Family,
    lp_row: SymLaurentPoly,
    hp_row: SymLaurentPoly,
    #[serde(skip_serializing_if = "Option::is_none")]
    syn_lp_row: Option<SymLaurentPoly>,
    #[serde(skip_serializing_if = "Option::is_none")]
    syn_hp_row: Option<SymLaurentPoly>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficient_row: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    dual_moments: bool,
    flags: Vec<String>,
}

/// `prod ((beta + a)/2)^k` and `prod ((beta - a)/2)^k` as Laurent rows.
pub fn spline_rows(
    g: &CirculantGraph,
    factors: &[SplineFactor],
) -> (SymLaurentPoly, SymLaurentPoly) {
    let a = g.normalized_adjacency_row();
    let mut lp = SymLaurentPoly::identity();
    let mut hp = SymLaurentPoly::identity();
    for f in factors {
        let plus = a.add(&SymLaurentPoly::constant(f.beta)).scale(0.5);
        let minus = SymLaurentPoly::constant(f.beta).sub(&a).scale(0.5);
        lp = lp.mul(&plus.pow(f.power));
        hp = hp.mul(&minus.pow(f.power));
    }
    (lp, hp)
}

/// Low- and high-pass frequency responses at `gamma`, an eigenvalue of `A/d`.
pub fn factor_responses(factors: &[SplineFactor], gamma: f64) -> (f64, f64) {
    let mut lp = 1.0;
    let mut hp = 1.0;
    for f in factors {
        lp *= ((f.beta + gamma) / 2.0).powi(f.power as i32);
        hp *= ((f.beta - gamma) / 2.0).powi(f.power as i32);
    }
    (lp, hp)
}

/// As [`factor_responses`], but a factor within [`COLLISION_TOL`] of zero is
/// taken as exactly zero.
pub fn snapped_responses(factors: &[SplineFactor], gamma: f64) -> (f64, f64) {
    let (mut lp, mut hp) = factor_responses(factors, gamma);
    for f in factors {
        if (f.beta + gamma).abs() < COLLISION_TOL {
            lp = 0.0;
        }
        if (f.beta - gamma).abs() < COLLISION_TOL {
            hp = 0.0;
        }
    }
    (lp, hp)
}

impl FilterBank {
    /// Higher-order graph spline bank.
    pub fn hgswt(g: &CirculantGraph, k: u32) -> Result<Self> {
        Self::from_betas(g, &[(1.0, k)])
    }

    /// Higher-order graph e-spline bank with uniform power `k`.
    pub fn hgeswt(g: &CirculantGraph, alphas: &[ExponentParam], k: u32) -> Result<Self> {
        if alphas.is_empty() {
            return Self::hgswt(g, k);
        }
        let spec: Vec<(ExponentParam, u32)> = alphas.iter().map(|&a| (a, k)).collect();
        Self::hgeswt_powers(g, &spec)
    }

    /// E-spline bank with a power per exponent.
    pub fn hgeswt_powers(g: &CirculantGraph, spec: &[(ExponentParam, u32)]) -> Result<Self> {
        if spec.is_empty() {
            return Err(GwtError::InvalidArgument("no exponents given".into()));
        }
        let d = g.degree();
        let betas: Vec<(f64, u32)> = spec.iter().map(|(p, k)| (g.e_degree(p) / d, *k)).collect();
        let mut fb = Self::from_betas(g, &betas)?;
        fb.alphas = spec.iter().map(|(p, _)| *p).collect();
        for ((p, _), (b, _)) in spec.iter().zip(&betas) {
            if b.abs() <= 1e-12 {
                fb.flags.push(format!(
                    "degenerate e-degree at alpha = {} ({:?})",
                    p.alpha, p.mode
                ));
            }
        }
        Ok(fb)
    }

    /// Bank from explicit `(beta, power)` factors.
    pub fn from_betas(g: &CirculantGraph, betas: &[(f64, u32)]) -> Result<Self> {
        g.require_connected()?;
        if betas.is_empty() {
            return Err(GwtError::InvalidArgument("no spline factors".into()));
        }
        if betas.iter().any(|&(_, k)| k == 0) {
            return Err(GwtError::InvalidArgument(
                "power k must be at least 1".into(),
            ));
        }
        let factors: Vec<SplineFactor> = betas
            .iter()
            .map(|&(beta, power)| SplineFactor { beta, power })
            .collect();
        let (lp_row, hp_row) = spline_rows(g, &factors);
        let mut flags = Vec::new();
        if 2 * lp_row.half_degree() > g.n() {
            flags.push("filter support wraps around the graph".to_string());
        }
        Ok(Self {
            graph: g.clone(),
            k: betas[0].1,
            alphas: Vec::new(),
            betas: factors.iter().map(|f| f.beta).collect(),
            powers: factors.iter().map(|f| f.power).collect(),
            factors,
            family: Family::Spline,
            lp_row,
            hp_row,
            syn_lp_row: None,
            syn_hp_row: None,
            coefficient_row: None,
            dual_moments: false,
            flags,
        })
    }

    pub(crate) fn into_complementary(
        mut self,
        lp_row: SymLaurentPoly,
        syn_lp_row: SymLaurentPoly,
        syn_hp_row: SymLaurentPoly,
        coefficient_row: Option<Vec<f64>>,
        dual_moments: bool,
    ) -> Self {
        self.family = Family::Complementary;
        self.lp_row = lp_row;
        self.syn_lp_row = Some(syn_lp_row);
        self.syn_hp_row = Some(syn_hp_row);
        self.coefficient_row = coefficient_row;
        self.dual_moments = dual_moments;
        self
    }

    pub fn graph(&self) -> &CirculantGraph {
        &self.graph
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alphas(&self) -> &[ExponentParam] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn factors(&self) -> &[SplineFactor] {
        &self.factors
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lp_row(&self) -> &SymLaurentPoly {
        &self.lp_row
    }

    pub fn hp_row(&self) -> &SymLaurentPoly {
        &self.hp_row
    }

    pub fn syn_lp_row(&self) -> Option<&SymLaurentPoly> {
        self.syn_lp_row.as_ref()
    }

    pub fn syn_hp_row(&self) -> Option<&SymLaurentPoly> {
        self.syn_hp_row.as_ref()
    }

    pub fn coefficient_row(&self) -> Option<&[f64]> {
        self.coefficient_row.as_deref()
    }

    pub fn dual_moments(&self) -> bool {
        self.dual_moments
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Sum of all factor powers (`T k` for uniform powers).
    pub fn total_power(&self) -> u32 {
        self.powers.iter().sum()
    }

    /// Points where the low-pass lift must vanish for Strang-Fix reproduction.
    fn reproduction_points(&self) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = Vec::new();
        if self.alphas.is_empty() {
            pts.push(Complex64::new(-1.0, 0.0));
        } else {
            for p in &self.alphas {
                let b = p.base();
                let cands = match p.mode {
                    ExpMode::Trigonometric => [-b, -b.conj()],
                    ExpMode::Hyperbolic => [-b, -b.inv()],
                };
                for c in cands {
                    if !pts.iter().any(|q| (q - c).norm() < 1e-12) {
                        pts.push(c);
                    }
                }
            }
        }
        pts
    }

    /// Multiplicity of the low-pass lift at `-1` (plain banks) or at
    /// `-e^{+-i alpha}` / `-e^{+-alpha}` for each exponent.
    pub fn strang_fix_multiplicity(&self) -> Vec<(Complex64, usize)> {
        self.reproduction_points()
            .into_iter()
            .map(|z| (z, root_multiplicity(&self.lp_row, z)))
            .collect()
    }

    /// Multiplicity of the high-pass lift at `1` or at `e^{+-i alpha}`.
    pub fn vanishing_moments(&self) -> Vec<(Complex64, usize)> {
        self.reproduction_points()
            .into_iter()
            .map(|z| (-z, root_multiplicity(&self.hp_row, -z)))
            .collect()
    }

    /// Dense `N x N` analysis matrix: row `i` of `H_LP` or `H_HP`.
    pub fn analysis_matrix(&self, sp: &SamplingPattern) -> Result<DMatrix<f64>> {
        let n = self.n();
        if sp.len() != n {
            return Err(GwtError::SizeMismatch {
                expected: n,
                got: sp.len(),
            });
        }
        let lp = self.lp_row.first_row(n);
        let hp = self.hp_row.first_row(n);
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let r = if sp.keep_lp[i] { &lp } else { &hp };
            r[(j + n - i) % n]
        }))
    }
}

/// Why a dense inverse was refused.
#[derive(Clone, Debug)]
pub struct SingularInfo {
    pub condition: f64,
    pub detail: String,
}

impl From<SingularInfo> for GwtError {
    fn from(s: SingularInfo) -> Self {
        GwtError::Singular {
            condition: s.condition,
            detail: s.detail,
        }
    }
}

/// Filterbank bound to a sampling pattern. The dense inverse is built on
/// first use and shared afterwards.
#[derive(Debug)]
pub struct Transform {
    bank: FilterBank,
    pattern: SamplingPattern,
    lp: CirculantOperator,
    hp: CirculantOperator,
    inverse: OnceLock<std::result::Result<Arc<DMatrix<f64>>, SingularInfo>>,
}

impl Transform {
    pub fn new(bank: FilterBank, pattern: SamplingPattern) -> Result<Self> {
        let n = bank.n();
        if pattern.len() != n {
            return Err(GwtError::SizeMismatch {
                expected: n,
                got: pattern.len(),
            });
        }
        let lp = CirculantOperator::new(bank.lp_row(), n);
        let hp = CirculantOperator::new(bank.hp_row(), n);
        Ok(Self {
            bank,
            pattern,
            lp,
            hp,
            inverse: OnceLock::new(),
        })
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn n(&self) -> usize {
        self.bank.n()
    }

    pub fn analyze(&self, x: &GraphSignal) -> Result<GraphSignal> {
        x.check_len(self.n())?;
        let l = self.lp.apply(x.values())?;
        let h = self.hp.apply(x.values())?;
        let w = (0..self.n())
            .map(|i| if self.pattern.keep_lp[i] { l[i] } else { h[i] })
            .collect();
        Ok(GraphSignal::new(w, x.label()))
    }

    /// FIR synthesis is used for complementary banks on the even-lowpass
    /// alternating pattern.
    pub fn has_fir_synthesis(&self) -> bool {
        self.bank.syn_lp_row.is_some() && self.pattern.alternation_sign() == Some(1.0)
    }

    pub fn invert(&self, w: &GraphSignal) -> Result<GraphSignal> {
        w.check_len(self.n())?;
        if self.has_fir_synthesis() {
            return self.synthesize_fir(w);
        }
        let inv = self.dense_inverse()?;
        Ok(GraphSignal::new(apply_real(&inv, w.values()), w.label()))
    }

    /// `x = G_LP (masked lowpass) + G_HP (masked highpass)`.
    pub fn synthesize_fir(&self, w: &GraphSignal) -> Result<GraphSignal> {
        let (Some(slp), Some(shp)) = (self.bank.syn_lp_row(), self.bank.syn_hp_row()) else {
            return Err(GwtError::InvalidArgument(
                "bank has no synthesis filters".into(),
            ));
        };
        let n = self.n();
        let zero = Complex64::new(0.0, 0.0);
        let wl: Vec<Complex64> = (0..n)
            .map(|i| {
                if self.pattern.keep_lp[i] {
                    w.values()[i]
                } else {
                    zero
                }
            })
            .collect();
        let wh: Vec<Complex64> = (0..n)
            .map(|i| {
                if self.pattern.keep_lp[i] {
                    zero
                } else {
                    w.values()[i]
                }
            })
            .collect();
        let a = CirculantOperator::new(slp, n).apply(&wl)?;
        let b = CirculantOperator::new(shp, n).apply(&wh)?;
        Ok(GraphSignal::new(
            a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            w.label(),
        ))
    }

    pub fn dense_inverse(&self) -> Result<Arc<DMatrix<f64>>> {
        self.inverse
            .get_or_init(|| compute_inverse(&self.bank, &self.pattern))
            .clone()
            .map_err(GwtError::from)
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn compute_inverse(
    bank: &FilterBank,
    sp: &SamplingPattern,
) -> std::result::Result<Arc<DMatrix<f64>>, SingularInfo> {
    let w = bank.analysis_matrix(sp).map_err(|e| SingularInfo {
        condition: f64::INFINITY,
        detail: e.to_string(),
    })?;
    checked_inverse(w)
}

/// LU inverse, refused above [`MAX_CONDITION`] in the 1-norm.
pub(crate) fn checked_inverse(
    w: DMatrix<f64>,
) -> std::result::Result<Arc<DMatrix<f64>>, SingularInfo> {
    let norm = one_norm(&w);
    match w.lu().try_inverse() {
        Some(inv) => {
            let cond = norm * one_norm(&inv);
            if cond.is_finite() && cond <= MAX_CONDITION {
                Ok(Arc::new(inv))
            } else {
                Err(SingularInfo {
                    condition: cond,
                    detail: "analysis matrix is numerically singular".into(),
                })
            }
        }
        None => Err(SingularInfo {
            condition: f64::INFINITY,
            detail: "analysis matrix is singular".into(),
        }),
    }
}

/// Applies a real matrix to the real and imaginary parts separately.
pub(crate) fn apply_real(m: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let re = DVector::from_iterator(x.len(), x.iter().map(|v| v.re));
    let im = DVector::from_iterator(x.len(), x.iter().map(|v| v.im));
    let xr = m * re;
    let xi = m * im;
    xr.iter()
        .zip(xi.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect()
}

/// One-shot forward transform.
pub fn analyze(fb: &FilterBank, sp: &SamplingPattern, x: &GraphSignal) -> Result<GraphSignal> {
    Transform::new(fb.clone(), sp.clone())?.analyze(x)
}

/// One-shot inverse; prefer [`Transform`] to reuse the factorization.
pub fn invert(fb: &FilterBank, sp: &SamplingPattern, w: &GraphSignal) -> Result<GraphSignal> {
    Transform::new(fb.clone(), sp.clone())?.invert(w)
}
