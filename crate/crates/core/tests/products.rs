mod common;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use gwt_core::complementary::hcgswt;
use gwt_core::multiscale::{BankKind, BankSpec, CoarseningStrategy, PyramidPlan};
use gwt_core::products::{
    example1_counts, kron_signal, laplacian_action_identity, lexicographic_circulant,
    lexicographic_generating_set, nonseparable_gwt, separable_analyze, separable_synthesize,
    smoothness_identity, ProductGraph, ProductKind, ProductTransform, SeparableTransform,
};
use gwt_core::{CirculantGraph, ExponentParam, FilterBank, GraphSignal, GwtError, SamplingPattern};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spline(k: u32) -> BankSpec {
    BankSpec {
        kind: BankKind::Hgswt,
        k,
        alphas: vec![],
        dual_moments: false,
    }
}

fn factor_pair() -> impl Strategy<Value = (CirculantGraph, CirculantGraph, u64)> {
    (3usize..9, 3usize..9, any::<u64>()).prop_map(|(n1, n2, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (
            common::random_graph(&mut rng, n1),
            common::random_graph(&mut rng, n2),
            seed,
        )
    })
}

fn kind_strategy() -> impl Strategy<Value = ProductKind> {
    prop::sample::select(ProductKind::ALL.to_vec())
}

#[test]
fn torus_is_four_regular() {
    let c4 = CirculantGraph::cycle(4).unwrap();
    let pg = ProductGraph::new(ProductKind::Cartesian, c4.clone(), c4);
    assert_eq!(pg.n(), 16);
    assert_eq!(pg.degree(), 4.0);
    let l = pg.dense_laplacian(false).unwrap();
    for i in 0..16 {
        assert_eq!(l.row(i).sum(), 0.0);
        assert_eq!(l[(i, i)], 4.0);
    }
}

#[test]
fn kronecker_laplacian_identity() {
    let g1 = CirculantGraph::unweighted(6, &[1, 2]).unwrap();
    let g2 = CirculantGraph::unweighted(5, &[1, 2]).unwrap();
    let (l1, l2) = (common::laplacian(&g1), common::laplacian(&g2));
    let d1 = DMatrix::identity(6, 6) * g1.degree();
    let d2 = DMatrix::identity(5, 5) * g2.degree();
    let lhs = l1.kronecker(&d2) + d1.kronecker(&l2) - l1.kronecker(&l2);
    let pg = ProductGraph::new(ProductKind::Kronecker, g1, g2);
    assert!((lhs - pg.dense_laplacian(false).unwrap()).amax() < 1e-12);
}

#[test]
fn lexicographic_degree() {
    let pg = ProductGraph::new(
        ProductKind::Lexicographic,
        CirculantGraph::cycle(4).unwrap(),
        CirculantGraph::cycle(3).unwrap(),
    );
    assert_eq!(pg.degree(), 8.0);
    let a = pg.dense_adjacency(false).unwrap();
    assert!((0..12).all(|i| a.row(i).sum() == 8.0));
}

#[test]
fn lexicographic_examples() {
    let (c, _) = lexicographic_circulant(
        &CirculantGraph::cycle(4).unwrap(),
        &CirculantGraph::cycle(3).unwrap(),
    )
    .unwrap();
    let s: Vec<usize> = c.gens().iter().map(|g| g.s).collect();
    assert_eq!((c.n(), s), (12, vec![1, 3, 4, 5]));
    let c2 = CirculantGraph::cycle(2).unwrap();
    let (k4, _) = lexicographic_circulant(&c2, &c2).unwrap();
    assert_eq!(k4.n(), 4);
    assert_eq!(
        common::adjacency(&k4),
        DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 })
    );
    let bad = CirculantGraph::unweighted(6, &[2]).unwrap();
    assert!(matches!(
        lexicographic_circulant(&bad, &c2),
        Err(GwtError::InvalidGraph(_))
    ));
}

#[test]
fn constant_highpass_on_cartesian_cycles() {
    let pg = ProductGraph::new(
        ProductKind::Cartesian,
        CirculantGraph::cycle(6).unwrap(),
        CirculantGraph::cycle(8).unwrap(),
    );
    for k in 1..=3 {
        let bank = nonseparable_gwt(&pg, &[], k).unwrap();
        let hp = bank.highpass(&vec![Complex64::new(1.0, 0.0); 48]);
        assert!(common::max_abs(&hp) < 1e-12);
    }
}

#[test]
fn kronecker_of_bipartite_cycles_is_rejected() {
    let c = CirculantGraph::cycle(6).unwrap();
    let pg = ProductGraph::new(
        ProductKind::Kronecker,
        c.clone(),
        CirculantGraph::cycle(4).unwrap(),
    );
    assert!(!pg.is_connected());
    assert!(matches!(
        nonseparable_gwt(&pg, &[], 1),
        Err(GwtError::Disconnected(_))
    ));
    let ok = ProductGraph::new(ProductKind::Kronecker, c, CirculantGraph::cycle(5).unwrap());
    assert!(ok.is_connected());
    assert!(nonseparable_gwt(&ok, &[], 1).is_ok());
}

#[test]
fn product_json_shape() {
    let pg = ProductGraph::new(
        ProductKind::Cartesian,
        CirculantGraph::cycle(4).unwrap(),
        CirculantGraph::unweighted(6, &[1, 2]).unwrap(),
    );
    let v = serde_json::to_value(&pg).unwrap();
    assert_eq!(v["kind"], "cartesian");
    assert_eq!(v["g1"]["n"], 4);
    let back: ProductGraph = serde_json::from_value(v).unwrap();
    assert_eq!(back, pg);
}

#[test]
fn dense_materialization_limit() {
    let big = CirculantGraph::cycle(128).unwrap();
    let pg = ProductGraph::new(ProductKind::Cartesian, big.clone(), big);
    assert!(pg.dense_adjacency(false).is_err());
}

fn dense_pyramid_level(bank: FilterBank) -> DMatrix<f64> {
    let n = bank.n();
    let w = bank
        .analysis_matrix(&SamplingPattern::alternating(n).unwrap())
        .unwrap();
    // Mallat order: kept low-pass rows (even nodes), then high-pass rows.
    let order: Vec<usize> = (0..n).step_by(2).chain((1..n).step_by(2)).collect();
    DMatrix::from_fn(n, n, |i, j| w[(order[i], j)])
}

#[test]
fn single_level_separable_is_w1_x_w2t() {
    let g1 = CirculantGraph::unweighted(8, &[1, 2]).unwrap();
    let g2 = CirculantGraph::unweighted(6, &[1]).unwrap();
    let t = SeparableTransform::build(
        &g1,
        &spline(1),
        &g2,
        &spline(2),
        CoarseningStrategy::PreserveSet,
        1,
    )
    .unwrap();
    let w1 = dense_pyramid_level(FilterBank::hgswt(&g1, 1).unwrap());
    let w2 = dense_pyramid_level(FilterBank::hgswt(&g2, 2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xr = common::random_real(&mut rng, 48);
    let x = DMatrix::from_row_slice(8, 6, &xr);
    let want = &w1 * x * w2.transpose();
    let got = t.analyze(&common::to_complex(&xr)).unwrap();
    for i in 0..8 {
        for j in 0..6 {
            assert!((got[i * 6 + j].re - want[(i, j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_tensor_has_one_coefficient() {
    let g1 = CirculantGraph::unweighted(16, &[1, 2]).unwrap();
    let g2 = CirculantGraph::cycle(8).unwrap();
    let p1 = PyramidPlan::new(&g1, &spline(1), CoarseningStrategy::PreserveSet, 4).unwrap();
    let p2 = PyramidPlan::new(&g2, &spline(1), CoarseningStrategy::PreserveSet, 3).unwrap();
    let t = SeparableTransform::new(p1, p2);
    let x = GraphSignal::from_real(&[3.0; 128], "");
    let c = separable_analyze(&t, &x).unwrap();
    let nonzero: Vec<usize> = (0..128).filter(|&i| c.values()[i].norm() > 1e-10).collect();
    assert_eq!(nonzero, vec![0]);
}

#[test]
fn separable_round_trips() {
    let g1 = CirculantGraph::unweighted(16, &[1, 2]).unwrap();
    let g2 = CirculantGraph::unweighted(8, &[1, 3]).unwrap();
    let comp = |g: &CirculantGraph, _: usize| hcgswt(g, 1, true);
    let builders: [(
        &dyn gwt_core::multiscale::BankBuilder,
        &dyn gwt_core::multiscale::BankBuilder,
    ); 3] = [
        (&spline(1), &spline(1)),
        (&spline(2), &spline(1)),
        (&comp, &comp),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (b1, b2) in builders {
        let p1 = PyramidPlan::new(&g1, b1, CoarseningStrategy::KeepExisting, 2).unwrap();
        let p2 = PyramidPlan::new(&g2, b2, CoarseningStrategy::KeepExisting, 2).unwrap();
        let t = SeparableTransform::new(p1, p2);
        let x = GraphSignal::new(common::random_complex(&mut rng, 128), "");
        let y = separable_synthesize(&t, &separable_analyze(&t, &x).unwrap()).unwrap();
        assert!(y.rel_error(&x) < 1e-8);
    }
}

#[test]
fn example_one_counts() {
    let c = example1_counts(16, 16, 1, 1).unwrap();
    assert_eq!(c.sep_formula, 175.0);
    assert_eq!(c.sep_empirical, 175);
    assert!(c.matches(), "{c:?}");
    for (n, m) in [(16, 2), (32, 1), (32, 3)] {
        let c = example1_counts(n, n, m, m).unwrap();
        assert!(c.matches(), "{c:?}");
        assert!(c.sep_formula > c.nonsep_formula());
    }
}

#[test]
fn smoothness_examples() {
    let g1 = CirculantGraph::unweighted(6, &[1, 2]).unwrap();
    let g2 = CirculantGraph::unweighted(8, &[1, 3]).unwrap();
    let r = smoothness_identity(ProductKind::Cartesian, &g1, &g2, &[1.0; 6], &[1.0; 8]).unwrap();
    assert!(r.direct.abs() < 1e-12);
    // Real eigenvectors: cos of the DFT angles.
    let (j1, j2) = (1, 3);
    let x1: Vec<f64> = (0..6)
        .map(|t| (2.0 * PI * (j1 * t) as f64 / 6.0).cos())
        .collect();
    let x2: Vec<f64> = (0..8)
        .map(|t| (2.0 * PI * (j2 * t) as f64 / 8.0).cos())
        .collect();
    let n1 = x1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n2 = x2.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x1: Vec<f64> = x1.iter().map(|v| v / n1).collect();
    let x2: Vec<f64> = x2.iter().map(|v| v / n2).collect();
    let lam = g1.laplacian_row().spectrum(6)[j1] + g2.laplacian_row().spectrum(8)[j2];
    let r = smoothness_identity(ProductKind::Cartesian, &g1, &g2, &x1, &x2).unwrap();
    assert!((r.direct - lam).abs() < 1e-12);
}

#[test]
fn e_laplacian_grid_exponentials() {
    let g1 = CirculantGraph::unweighted(8, &[1, 2]).unwrap();
    let g2 = CirculantGraph::unweighted(6, &[1]).unwrap();
    let (a1, a2) = (2.0 * PI * 1.0 / 8.0, 2.0 * PI * 2.0 / 6.0);
    let x1: Vec<Complex64> = (0..8)
        .map(|t| Complex64::from_polar(1.0, a1 * t as f64))
        .collect();
    let x2: Vec<Complex64> = (0..6)
        .map(|t| Complex64::from_polar(1.0, a2 * t as f64))
        .collect();
    let p = (ExponentParam::trig(a1), ExponentParam::trig(a2));
    for kind in ProductKind::ALL {
        let pg = ProductGraph::new(kind, g1.clone(), g2.clone());
        let y = pg
            .e_laplacian(&p.0, &p.1)
            .apply(&kron_signal(&x1, &x2))
            .unwrap();
        if kind == ProductKind::Lexicographic {
            assert!(common::max_abs(&y) > 1e-3);
        } else {
            assert!(common::max_abs(&y) < 1e-12, "{kind:?}");
        }
    }
    // Constant second factor: the lexicographic case vanishes too.
    let ones = vec![Complex64::new(1.0, 0.0); 6];
    let q = (ExponentParam::trig(a1), ExponentParam::trig(0.0));
    let pg = ProductGraph::new(ProductKind::Lexicographic, g1.clone(), g2.clone());
    let y = pg
        .e_laplacian(&q.0, &q.1)
        .apply(&kron_signal(&x1, &ones))
        .unwrap();
    assert!(common::max_abs(&y) < 1e-12);
}

#[test]
fn constants_are_in_every_nullspace() {
    let g1 = CirculantGraph::unweighted(7, &[1, 3]).unwrap();
    let g2 = CirculantGraph::unweighted(5, &[2]).unwrap();
    let one1 = vec![Complex64::new(1.0, 0.0); 7];
    let one2 = vec![Complex64::new(1.0, 0.0); 5];
    for kind in ProductKind::ALL {
        let r = laplacian_action_identity(kind, &g1, &g2, &one1, &one2, None).unwrap();
        assert!(r.direct_max < 1e-12);
    }
}

#[test]
fn nonseparable_product_bank_matches_dense() {
    let pg = ProductGraph::new(
        ProductKind::Strong,
        CirculantGraph::unweighted(6, &[1, 2]).unwrap(),
        CirculantGraph::cycle(4).unwrap(),
    );
    let bank = nonseparable_gwt(&pg, &[], 2).unwrap();
    let a = common::product_adjacency(ProductKind::Strong, &pg.g1, &pg.g2) / pg.degree();
    let id = DMatrix::<f64>::identity(24, 24);
    let lp = ((&id + &a) * 0.5).pow(2);
    let hp = ((&id - &a) * 0.5).pow(2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = common::random_complex(&mut rng, 24);
    assert!(common::max_abs_diff(&bank.lowpass(&x), &common::matvec(&lp, &x)) < 1e-12);
    assert!(common::max_abs_diff(&bank.highpass(&x), &common::matvec(&hp, &x)) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structured_operators_match_dense((g1, g2, seed) in factor_pair(), kind in kind_strategy()) {
        let pg = ProductGraph::new(kind, g1.clone(), g2.clone());
        let a = common::product_adjacency(kind, &g1, &g2);
        let l = common::laplacian_of(&a);
        prop_assert!((pg.dense_adjacency(false).unwrap() - &a).amax() < 1e-12);
        prop_assert!((pg.dense_laplacian(false).unwrap() - &l).amax() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_complex(&mut rng, pg.n());
        let scale = 1.0 + l.amax() * pg.n() as f64;
        prop_assert!(common::max_abs_diff(&pg.adjacency().apply(&x).unwrap(), &common::matvec(&a, &x)) < 1e-12 * scale);
        prop_assert!(common::max_abs_diff(&pg.laplacian().apply(&x).unwrap(), &common::matvec(&l, &x)) < 1e-12 * scale);
        for (s, d) in common::sorted(pg.adjacency_spectrum()).iter().zip(common::sorted_eigenvalues(&a)) {
            prop_assert!((s - d).abs() < 1e-9 * scale);
        }
        prop_assert!((pg.degree() - a.row(0).sum()).abs() < 1e-12 * scale);
    }

    #[test]
    fn e_laplacian_matches_dense((g1, g2, seed) in factor_pair(), kind in kind_strategy(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let (p1, p2) = (ExponentParam::trig(t1), ExponentParam::trig(t2));
        let pg = ProductGraph::new(kind, g1.clone(), g2.clone());
        let a = common::product_adjacency(kind, &g1, &g2);
        let e = pg.e_degree(&p1, &p2);
        let mut m = -a;
        for i in 0..pg.n() {
            m[(i, i)] = e;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_complex(&mut rng, pg.n());
        let y = pg.e_laplacian(&p1, &p2).apply(&x).unwrap();
        prop_assert!(common::max_abs_diff(&y, &common::matvec(&m, &x)) < 1e-11 * (1.0 + m.amax()) * pg.n() as f64);
    }

    #[test]
    fn lexicographic_relabelling_is_exact((g1, g2, _) in factor_pair(), unit in any::<bool>()) {
        let (g1, g2) = if unit {
            let h1: Vec<usize> = g1.gens().iter().map(|g| g.s).collect();
            let h2: Vec<usize> = g2.gens().iter().map(|g| g.s).collect();
            (CirculantGraph::unweighted(g1.n(), &h1).unwrap(), CirculantGraph::unweighted(g2.n(), &h2).unwrap())
        } else {
            (g1, g2)
        };
        prop_assume!(g1.has_unit_hop());
        let (c, perm) = lexicographic_circulant(&g1, &g2).unwrap();
        let a = common::product_adjacency(ProductKind::Lexicographic, &g1, &g2);
        let circ = common::adjacency(&c);
        let n = c.n();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(circ[(perm[i], perm[j])], a[(i, j)]);
            }
        }
        if unit {
            let s: BTreeSet<usize> = c.gens().iter().map(|g| g.s).collect();
            prop_assert_eq!(s, lexicographic_generating_set(&g1, &g2));
        }
    }

    #[test]
    fn smoothness_identities_hold((g1, g2, seed) in factor_pair(), kind in kind_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1 = common::random_real(&mut rng, g1.n());
        let x2 = common::random_real(&mut rng, g2.n());
        let r = smoothness_identity(kind, &g1, &g2, &x1, &x2).unwrap();
        let x: Vec<f64> = x1.iter().flat_map(|a| x2.iter().map(move |b| a * b)).collect();
        let l = common::laplacian_of(&common::product_adjacency(kind, &g1, &g2));
        let xv = nalgebra::DVector::from_vec(x);
        let oracle = (xv.transpose() * &l * &xv)[(0, 0)];
        let scale = 1.0 + oracle.abs();
        prop_assert!((r.direct - oracle).abs() < 1e-10 * scale);
        prop_assert!((r.predicted - oracle).abs() < 1e-9 * scale);
        prop_assert!(r.residual <= 1e-9);
    }

    #[test]
    fn action_identities_hold((g1, g2, seed) in factor_pair(), kind in kind_strategy(), e_variant in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1 = common::random_complex(&mut rng, g1.n());
        let x2 = common::random_complex(&mut rng, g2.n());
        let params = e_variant.then(|| (ExponentParam::trig(rng.random_range(0.0..PI)), ExponentParam::hyperbolic(rng.random_range(0.0..0.5))));
        let r = laplacian_action_identity(kind, &g1, &g2, &x1, &x2, params).unwrap();
        prop_assert!(r.residual <= 1e-9);
    }

    #[test]
    fn nonseparable_spline_reconstructs((g1, g2, seed) in factor_pair(), kind in kind_strategy(), k in 1u32..3) {
        let pg = ProductGraph::new(kind, g1, g2);
        prop_assume!(pg.is_connected());
        let bank = nonseparable_gwt(&pg, &[], k).unwrap();
        let n = pg.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        keep[rng.random_range(0..n)] = true;
        let bipartite_spectrum = pg.adjacency_spectrum().iter().any(|l| (l + pg.degree()).abs() < 1e-9);
        if bipartite_spectrum && keep.iter().all(|&b| b) {
            keep[0] = false;
            keep[1] = true;
        }
        let sp = SamplingPattern::new(keep);
        let rep = bank.check_invertibility(&sp).unwrap();
        prop_assert!(rep.invertible, "{}", rep.detail);
        let t = ProductTransform::new(bank, sp).unwrap();
        let x = common::random_complex(&mut rng, n);
        let y = t.invert(&t.analyze(&x).unwrap()).unwrap();
        prop_assert!(common::max_abs_diff(&x, &y) <= 1e-8 * common::max_abs(&x));
    }

    #[test]
    fn nonseparable_check_agrees_with_dense_rank((g1, g2, seed) in factor_pair(), kind in kind_strategy(), t in 0.0f64..3.0) {
        let pg = ProductGraph::new(kind, g1, g2);
        prop_assume!(pg.is_connected());
        let bank = nonseparable_gwt(&pg, &[(ExponentParam::trig(t), ExponentParam::trig(0.0))], 1).unwrap();
        let n = pg.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = SamplingPattern::new((0..n).map(|_| rng.random_bool(0.5)).collect());
        let rep = bank.check_invertibility(&sp).unwrap();
        let (rank, smin) = gwt_core::invertibility::numeric_rank(&bank.analysis_matrix(&sp).unwrap(), gwt_core::invertibility::DENSE_RANK_TOL);
        prop_assume!(!(1e-12..=1e-7).contains(&smin));
        prop_assert_eq!(rep.invertible, rank == n, "{}", rep.detail);
    }
}
