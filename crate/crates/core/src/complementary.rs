//! Biorthogonal complements by spectral factorization of the half-band
//! product `P(z) = H_LP(z) H_HP(-z)`, with FIR synthesis by modulation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::circulant::{CirculantGraph, ExpMode, ExponentParam};
use crate::error::{GwtError, Result};
use crate::filterbank::{FilterBank, Transform};
use crate::invertibility::lowpass_invertible;
use crate::laurent::{poly_eval, poly_roots, SymLaurentPoly};
use crate::pattern::SamplingPattern;
use crate::signal::GraphSignal;

/// Upward adjustments of the unknown half-support before giving up.
pub const MAX_RETRIES: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct BezoutFeasibility {
    pub has_zero_root: bool,
    pub opposite_root_pairs: Vec<(Complex64, Complex64)>,
    pub feasible: bool,
}

/// A complement exists iff the lift has no zero root and no pair `(r, -r)`.
pub fn bezout_feasible(c: &SymLaurentPoly) -> BezoutFeasibility {
    let q = c.lift();
    let scale = c.max_abs();
    let top = *c.coeffs().last().expect("nonempty");
    if scale == 0.0 || top.abs() <= 1e-12 * scale {
        return BezoutFeasibility {
            has_zero_root: true,
            opposite_root_pairs: Vec::new(),
            feasible: false,
        };
    }
    let roots = poly_roots(&q);
    let mut pairs: Vec<(Complex64, Complex64)> = Vec::new();
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let r = roots[i];
        let bound: f64 = q
            .iter()
            .enumerate()
            .map(|(j, a)| a.abs() * r.norm().powi(j as i32))
            .sum();
        if poly_eval(&q, -r).norm() > 1e-8 * bound {
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (roots[a] + r)
                    .norm()
                    .partial_cmp(&(roots[b] + r).norm())
                    .unwrap()
            });
        if let Some(j) = partner {
            used[i] = true;
            used[j] = true;
            pairs.push((r, roots[j]));
        }
    }
    let feasible = pairs.is_empty();
    BezoutFeasibility {
        has_zero_root: false,
        opposite_root_pairs: pairs,
        feasible,
    }
}

/// Linear system for the free factor `R` in `H_LP = F R`.
#[derive(Clone, Debug, Serialize)]
pub struct HalfBandSystem {
    /// `C(z) = H_HP(-z)`.
    pub target_hp: SymLaurentPoly,
    /// `F`, the imposed vanishing-moment factor (`[1]` when trivial).
    pub imposed_factor: SymLaurentPoly,
    pub unknown_halfsupport: usize,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    #[serde(skip)]
    pub rhs: DVector<f64>,
    pub solution: SymLaurentPoly,
    /// Extra roots at `z = -1` imposed on `R`.
    pub extra_root_constraints: usize,
}

impl HalfBandSystem {
    pub fn lowpass(&self) -> SymLaurentPoly {
        self.imposed_factor.mul(&self.solution)
    }
}

/// Solve `p_0 = 1`, `p_{2m} = 0` for `P = F R C`.
pub fn solve_half_band(
    target_hp: &SymLaurentPoly,
    imposed: &SymLaurentPoly,
) -> Result<HalfBandSystem> {
    let q = imposed.mul(target_hp);
    let dq = q.half_degree();
    if dq == 0 {
        return Err(GwtError::BezoutInfeasible(
            "target high-pass is a constant".into(),
        ));
    }
    let mut last_cond = f64::INFINITY;
    for t in (dq - 1)..=(dq - 1 + MAX_RETRIES) {
        let unknowns = t + 1;
        let half_band = 1 + (dq + t) / 2;
        if half_band > unknowns {
            continue;
        }
        let extra = unknowns - half_band;
        // Column i: the product Q * (z^i + z^-i), or Q for i = 0.
        let cols: Vec<SymLaurentPoly> = (0..unknowns)
            .map(|i| {
                let mut e = vec![0.0; i + 1];
                e[i] = 1.0;
                q.mul(&SymLaurentPoly::new(e))
            })
            .collect();
        let mut m = DMatrix::<f64>::zeros(unknowns, unknowns);
        let mut rhs = DVector::<f64>::zeros(unknowns);
        for (row, mm) in (0..half_band).enumerate() {
            for (c, col) in cols.iter().enumerate() {
                m[(row, c)] = col.coeffs().get(2 * mm).copied().unwrap_or(0.0);
            }
        }
        rhs[0] = 1.0;
        for l in 0..extra {
            let row = half_band + l;
            for c in 0..unknowns {
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                let v = if c == 0 {
                    if l == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    2.0 * sign * (c as f64).powi(2 * l as i32)
                };
                m[(row, c)] = v;
            }
            let mx = m.row(row).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if mx > 0.0 {
                for c in 0..unknowns {
                    m[(row, c)] /= mx;
                }
            }
        }
        let sv = m.singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        last_cond = smax / smin;
        if !(smin > 1e-12 * smax) {
            continue;
        }
        let Some(sol) = m.clone().lu().solve(&rhs) else {
            continue;
        };
        return Ok(HalfBandSystem {
            target_hp: target_hp.clone(),
            imposed_factor: imposed.clone(),
            unknown_halfsupport: t,
            matrix: m,
            rhs,
            solution: SymLaurentPoly::new(sol.iter().copied().collect()),
            extra_root_constraints: extra,
        });
    }
    Err(GwtError::Singular {
        condition: last_cond,
        detail: format!("half-band system stayed singular after {MAX_RETRIES} support increases"),
    })
}

/// `prod (z + 2 cos(alpha) + z^-1)^k` (cosh for hyperbolic exponents); the
/// plain spline case is `(z + 2 + z^-1)^k`.
pub fn moment_factor(alphas: &[ExponentParam], k: u32) -> SymLaurentPoly {
    let list: Vec<ExponentParam> = if alphas.is_empty() {
        vec![ExponentParam::trig(0.0)]
    } else {
        alphas.to_vec()
    };
    list.iter().fold(SymLaurentPoly::identity(), |acc, p| {
        let c = match p.mode {
            ExpMode::Trigonometric => 2.0 * p.alpha.cos(),
            ExpMode::Hyperbolic => 2.0 * p.alpha.cosh(),
        };
        acc.mul(&SymLaurentPoly::two_tap(c, 1.0).pow(k))
    })
}

/// Max over the `n`-th roots of unity of `|P(z) + P(-z) - 2|`.
pub fn half_band_residual(lp: &SymLaurentPoly, hp: &SymLaurentPoly, n: usize) -> f64 {
    let p = lp.mul(&hp.modulated());
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            (p.eval_unit(t) + p.eval_unit(t + PI) - 2.0).abs()
        })
        .fold(0.0, f64::max)
}

fn build_system(
    spline: &FilterBank,
    alphas: &[ExponentParam],
    k: u32,
    dual_moments: bool,
) -> Result<HalfBandSystem> {
    let c = spline.hp_row().modulated();
    let f = if dual_moments {
        moment_factor(alphas, k)
    } else {
        SymLaurentPoly::identity()
    };
    let q = f.mul(&c);
    let feas = bezout_feasible(&q);
    if !feas.feasible {
        let why = if feas.has_zero_root {
            "zero root".to_string()
        } else {
            let (a, b) = feas.opposite_root_pairs[0];
            format!(
                "opposite roots {:.6}{:+.6}i and {:.6}{:+.6}i",
                a.re, a.im, b.re, b.im
            )
        };
        return Err(GwtError::BezoutInfeasible(why));
    }
    solve_half_band(&c, &f)
}

/// Analysis low-pass complementing the spline (or e-spline) high-pass.
pub fn complement_lowpass(
    g: &CirculantGraph,
    k: u32,
    alphas: &[ExponentParam],
    dual_moments: bool,
) -> Result<SymLaurentPoly> {
    let spline = FilterBank::hgeswt(g, alphas, k)?;
    Ok(build_system(&spline, alphas, k, dual_moments)?.lowpass())
}

/// Half-band system behind [`complement_lowpass`], for inspection.
pub fn complement_system(
    g: &CirculantGraph,
    k: u32,
    alphas: &[ExponentParam],
    dual_moments: bool,
) -> Result<HalfBandSystem> {
    let spline = FilterBank::hgeswt(g, alphas, k)?;
    build_system(&spline, alphas, k, dual_moments)
}

/// `H(-z)` expanded to a length-`n` first row.
pub fn modulate(row: &SymLaurentPoly, n: usize) -> Result<Vec<f64>> {
    if !n.is_multiple_of(2) {
        return Err(GwtError::OddSize(n));
    }
    Ok(row
        .first_row(n)
        .into_iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 1 { -v } else { v })
        .collect())
}

/// Complementary graph spline bank.
pub fn hcgswt(g: &CirculantGraph, k: u32, dual_moments: bool) -> Result<FilterBank> {
    hcgeswt(g, &[], k, dual_moments)
}

/// Complementary graph e-spline bank.
pub fn hcgeswt(
    g: &CirculantGraph,
    alphas: &[ExponentParam],
    k: u32,
    dual_moments: bool,
) -> Result<FilterBank> {
    let n = g.n();
    if !n.is_multiple_of(2) {
        return Err(GwtError::OddSize(n));
    }
    let spline = FilterBank::hgeswt(g, alphas, k)?;
    let system = build_system(&spline, alphas, k, dual_moments)?;
    let lp = system.lowpass();
    let hp = spline.hp_row().clone();
    let hb = half_band_residual(&lp, &hp, n);
    if hb > 1e-10 {
        return Err(GwtError::ReconstructionFailed(hb));
    }
    let (c1, c2) = synthesis_scales(&lp, &hp, n);
    let syn_lp = hp.modulated().scale(c1);
    let syn_hp = lp.modulated().scale(c2);
    let coef = if lowpass_invertible(&spline) {
        Some(coefficient_row(&lp, spline.lp_row(), n))
    } else {
        None
    };
    let bank = spline.into_complementary(lp, syn_lp, syn_hp, coef, dual_moments);
    let pr = pr_residual(&bank)?;
    if pr > 1e-8 {
        return Err(GwtError::ReconstructionFailed(pr));
    }
    Ok(bank)
}

/// Least-squares `c1, c2` from the no-distortion and alias-cancellation
/// identities at the `n`-th roots of unity.
fn synthesis_scales(lp: &SymLaurentPoly, hp: &SymLaurentPoly, n: usize) -> (f64, f64) {
    let mut a = DMatrix::<f64>::zeros(2 * n, 2);
    let mut b = DVector::<f64>::zeros(2 * n);
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        let (l, lm) = (lp.eval_unit(t), lp.eval_unit(t + PI));
        let (h, hm) = (hp.eval_unit(t), hp.eval_unit(t + PI));
        a[(2 * j, 0)] = hm * l;
        a[(2 * j, 1)] = lm * h;
        b[2 * j] = 2.0;
        a[(2 * j + 1, 0)] = hm * lm;
        a[(2 * j + 1, 1)] = -lm * hm;
    }
    let svd = a.svd(true, true);
    match svd.solve(&b, 1e-14) {
        Ok(c) => (c[0], c[1]),
        Err(_) => (1.0, 1.0),
    }
}

/// Spectral quotient `H_LP,an / H_LP,spline` as a length-`n` first row.
fn coefficient_row(an: &SymLaurentPoly, spline_lp: &SymLaurentPoly, n: usize) -> Vec<f64> {
    let num = an.spectrum(n);
    let den = spline_lp.spectrum(n);
    let mut buf: Vec<Complex64> = num
        .iter()
        .zip(&den)
        .map(|(a, b)| Complex64::new(a / b, 0.0))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|v| v.re / n as f64).collect()
}

/// Relative round-trip error of FIR synthesis on a fixed pseudo-random signal.
pub fn pr_residual(bank: &FilterBank) -> Result<f64> {
    let n = bank.n();
    let t = Transform::new(bank.clone(), SamplingPattern::alternating(n)?)?;
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let x: Vec<f64> = (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let x = GraphSignal::from_real(&x, "");
    let w = t.analyze(&x)?;
    let y = t.synthesize_fir(&w)?;
    Ok(y.rel_error(&x))
}
