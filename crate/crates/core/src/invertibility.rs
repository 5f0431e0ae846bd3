//! Decision cascade for invertibility of `W = (I+K)/2 H_LP + (I-K)/2 H_HP`.
//!
//! Writing `E = (H_LP + H_HP)/2` and `O = (H_LP - H_HP)/2`, `W = E + K O` and
//! `E^2 - O^2 = H_LP H_HP`, whose eigenvalues are `prod (beta^2 - gamma^2)^k / 4^k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::circulant::dft_vector;
use crate::filterbank::{snapped_responses, Family, FilterBank, SplineFactor, COLLISION_TOL};
use crate::pattern::SamplingPattern;

/// Relative singular value threshold for the dense fallback.
pub const DENSE_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    KEven,
    SameSignF,
    EigenRank,
    NumericFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Collision {
    pub beta: f64,
    pub gamma: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankTest {
    pub method: String,
    pub rank: usize,
    pub required: usize,
    pub min_singular_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvertibilityReport {
    pub invertible: bool,
    pub condition_used: Condition,
    pub colliding_betas: Vec<Collision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_test: Option<RankTest>,
    pub detail: String,
}

/// Everything the cascade needs, independent of how the operator was built.
pub struct SpectralProblem<'a> {
    /// Eigenvalues of the normalized adjacency, one per eigenvector index.
    pub gammas: &'a [f64],
    /// Spline factors; `None` for banks whose responses are not functions of
    /// `gamma` alone, which skips the collision branches.
    pub factors: Option<&'a [SplineFactor]>,
    /// `(lp, hp)` eigenvalues per eigenvector index.
    pub responses: Vec<(f64, f64)>,
    pub keep_lp: &'a [bool],
    /// Orthonormal eigenvector for an index.
    pub eigvec: &'a dyn Fn(usize) -> Vec<Complex64>,
    /// `K u_j = +- u_{pairing[j]}` when the pattern is a modulation.
    pub pairing: Option<Vec<usize>>,
    /// Dense analysis matrix for the numeric fallback.
    pub dense: &'a dyn Fn() -> DMatrix<f64>,
}

pub fn check_invertibility(fb: &FilterBank, sp: &SamplingPattern) -> InvertibilityReport {
    let n = fb.n();
    if sp.len() != n {
        return InvertibilityReport {
            invertible: false,
            condition_used: Condition::NumericFallback,
            colliding_betas: Vec::new(),
            rank_test: None,
            detail: format!("pattern length {} does not match graph size {n}", sp.len()),
        };
    }
    let gammas = fb.graph().normalized_spectrum();
    let (factors, responses) = match fb.family() {
        Family::Spline => (
            Some(fb.factors()),
            gammas
                .iter()
                .map(|&g| snapped_responses(fb.factors(), g))
                .collect(),
        ),
        Family::Complementary => (None, {
            let l = fb.lp_row().spectrum(n);
            let h = fb.hp_row().spectrum(n);
            l.into_iter().zip(h).collect()
        }),
    };
    let pairing = sp
        .alternation_sign()
        .map(|_| (0..n).map(|j| (j + n / 2) % n).collect());
    let eig = |j: usize| dft_vector(n, j);
    let dense = || fb.analysis_matrix(sp).expect("pattern length checked");
    decide(&SpectralProblem {
        gammas: &gammas,
        factors,
        responses,
        keep_lp: &sp.keep_lp,
        eigvec: &eig,
        pairing,
        dense: &dense,
    })
}

pub fn decide(p: &SpectralProblem<'_>) -> InvertibilityReport {
    let Some(factors) = p.factors else {
        return structural(p, Vec::new());
    };
    let mut collisions: Vec<Collision> = Vec::new();
    let mut colliding_idx = Vec::new();
    let mut f_signs = Vec::new();
    for (i, &g) in p.gammas.iter().enumerate() {
        let mut hit = false;
        for f in factors {
            if (f.beta.abs() - g.abs()).abs() < COLLISION_TOL {
                hit = true;
                match collisions.iter_mut().find(|c| {
                    (c.beta - f.beta).abs() < COLLISION_TOL && (c.gamma - g).abs() < COLLISION_TOL
                }) {
                    Some(c) => c.multiplicity += 1,
                    None => collisions.push(Collision {
                        beta: f.beta,
                        gamma: g,
                        multiplicity: 1,
                    }),
                }
            }
        }
        if hit {
            colliding_idx.push(i);
        } else {
            let f: f64 = factors
                .iter()
                .map(|f| (f.beta * f.beta - g * g).powi(f.power as i32))
                .product();
            f_signs.push(f > 0.0);
        }
    }
    let all_even = factors.iter().all(|f| f.power % 2 == 0);
    let same_sign = f_signs.iter().all(|&s| s) || f_signs.iter().all(|&s| !s);

    if colliding_idx.is_empty() && (all_even || same_sign) {
        let (cond, why) = if all_even {
            (
                Condition::KEven,
                "all powers even, no |beta| = |gamma| collision",
            )
        } else {
            (
                Condition::SameSignF,
                "prod (beta^2 - gamma^2)^k keeps one sign over the spectrum",
            )
        };
        return InvertibilityReport {
            invertible: true,
            condition_used: cond,
            colliding_betas: collisions,
            rank_test: None,
            detail: why.into(),
        };
    }

    if same_sign || all_even {
        let rt = sampled_rank(p, &colliding_idx);
        let ok = rt.rank == rt.required;
        return InvertibilityReport {
            invertible: ok,
            condition_used: Condition::EigenRank,
            colliding_betas: collisions,
            detail: format!(
                "sampled colliding eigenvectors have rank {} of {}",
                rt.rank, rt.required
            ),
            rank_test: Some(rt),
        };
    }

    structural(p, collisions)
}

/// Modulation-pair test when the pattern allows it, else dense rank.
fn structural(p: &SpectralProblem<'_>, collisions: Vec<Collision>) -> InvertibilityReport {
    if let Some(pairing) = &p.pairing {
        let rt = paired_test(p, pairing);
        let ok = rt.rank == rt.required;
        return InvertibilityReport {
            invertible: ok,
            condition_used: Condition::EigenRank,
            colliding_betas: collisions,
            detail: format!(
                "{} of {} modulation-paired 2x2 blocks are nonsingular",
                rt.rank, rt.required
            ),
            rank_test: Some(rt),
        };
    }

    let w = (p.dense)();
    let (rank, smin) = numeric_rank(&w, DENSE_RANK_TOL);
    let n = w.nrows();
    InvertibilityReport {
        invertible: rank == n,
        condition_used: Condition::NumericFallback,
        colliding_betas: collisions,
        detail: format!("dense analysis matrix has numeric rank {rank} of {n}"),
        rank_test: Some(RankTest {
            method: "dense-svd".into(),
            rank,
            required: n,
            min_singular_value: smin,
        }),
    }
}

/// Rank of the colliding eigenvectors after sampling: column `v` has entries
/// `u_v(i) * (lp(gamma_v) if keep_i else hp(gamma_v))`.
fn sampled_rank(p: &SpectralProblem<'_>, idx: &[usize]) -> RankTest {
    let n = p.keep_lp.len();
    let m = idx.len();
    let mut mat = DMatrix::<Complex64>::zeros(n, m);
    let mut zero_col = false;
    for (c, &v) in idx.iter().enumerate() {
        let (lp, hp) = p.responses[v];
        let u = (p.eigvec)(v);
        let mut norm = 0.0;
        for i in 0..n {
            let s = if p.keep_lp[i] { lp } else { hp };
            mat[(i, c)] = u[i] * s;
            norm += mat[(i, c)].norm_sqr();
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            zero_col = true;
        } else {
            for i in 0..n {
                mat[(i, c)] /= norm;
            }
        }
    }
    let sv = mat.singular_values();
    let thr = 1e-10 * (n as f64).sqrt();
    let mut rank = sv.iter().filter(|&&s| s > thr).count();
    if zero_col {
        rank = rank.min(m.saturating_sub(1));
    }
    RankTest {
        method: "sampled-eigenvectors".into(),
        rank,
        required: m,
        min_singular_value: sv.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// On the span of `u_j` and `u_{pair(j)}`, `W` acts as
/// `[[E_j, O_p], [O_j, E_p]]` up to the sign of `K`.
fn paired_test(p: &SpectralProblem<'_>, pairing: &[usize]) -> RankTest {
    let mut good = 0;
    let mut blocks = 0;
    let mut smin = f64::INFINITY;
    for (j, &q) in pairing.iter().enumerate() {
        if q < j {
            continue;
        }
        blocks += 1;
        let (lj, hj) = p.responses[j];
        let (lq, hq) = p.responses[q];
        let (ej, oj) = ((lj + hj) / 2.0, (lj - hj) / 2.0);
        let (eq, oq) = ((lq + hq) / 2.0, (lq - hq) / 2.0);
        let det = if q == j { ej + oj } else { ej * eq - oj * oq };
        let scale = (ej * eq).abs().max((oj * oq).abs());
        smin = smin.min(det.abs());
        if scale > 0.0 && det.abs() > 1e-10 * scale {
            good += 1;
        }
    }
    RankTest {
        method: "modulation-pairs".into(),
        rank: good,
        required: blocks,
        min_singular_value: smin,
    }
}

/// Numeric rank with threshold `tol * sigma_max`, plus the smallest singular value.
pub fn numeric_rank(w: &DMatrix<f64>, tol: f64) -> (usize, f64) {
    let sv = w.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    (sv.iter().filter(|&&s| s > tol * smax).count(), smin)
}

/// True unless some `beta_n = -gamma_i`, i.e. the low-pass has a zero eigenvalue.
pub fn lowpass_invertible(fb: &FilterBank) -> bool {
    fb.graph()
        .normalized_spectrum()
        .iter()
        .all(|&g| snapped_responses(fb.factors(), g).0 != 0.0)
}

/// Smallest singular value of the dense low-pass circulant.
pub fn lowpass_min_singular_value(fb: &FilterBank) -> f64 {
    let m = crate::laurent::dense_circulant(&fb.lp_row().first_row(fb.n()));
    m.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
