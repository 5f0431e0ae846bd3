mod common;

use std::f64::consts::PI;

use gwt_core::circulant::{dft_vector, CirculantOperator};
use gwt_core::{
    apply_circulant, exp_poly_signal, poly_signal, root_multiplicity, CirculantGraph,
    ExponentParam, Generator, GraphSignal, GwtError, PolyPiece, SymLaurentPoly,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_strategy() -> impl Strategy<Value = CirculantGraph> {
    (3usize..40, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        common::random_graph(&mut rng, n)
    })
}

#[test]
fn rejects_bad_generating_sets() {
    assert!(matches!(
        CirculantGraph::unweighted(8, &[]),
        Err(GwtError::InvalidGraph(_))
    ));
    assert!(matches!(
        CirculantGraph::unweighted(8, &[0]),
        Err(GwtError::InvalidGraph(_))
    ));
    assert!(matches!(
        CirculantGraph::unweighted(8, &[5]),
        Err(GwtError::InvalidGraph(_))
    ));
    assert!(matches!(
        CirculantGraph::unweighted(8, &[1, 1]),
        Err(GwtError::InvalidGraph(_))
    ));
    assert!(CirculantGraph::new(8, vec![Generator { s: 1, w: -1.0 }]).is_err());
    assert!(CirculantGraph::new(1, vec![Generator { s: 1, w: 1.0 }]).is_err());
}

#[test]
fn degree_and_connectivity() {
    let k4 = CirculantGraph::unweighted(4, &[1, 2]).unwrap();
    assert_eq!(k4.degree(), 3.0);
    assert!(k4.is_connected());
    let split = CirculantGraph::unweighted(8, &[2]).unwrap();
    assert!(!split.is_connected());
    assert!(matches!(
        split.require_connected(),
        Err(GwtError::Disconnected(_))
    ));
    assert!(CirculantGraph::unweighted(10, &[2, 5])
        .unwrap()
        .is_connected());
    assert!(CirculantGraph::cycle(8).unwrap().is_bipartite());
    assert!(!CirculantGraph::cycle(7).unwrap().is_bipartite());
}

#[test]
fn half_generator_counted_once() {
    let k4 = CirculantGraph::unweighted(4, &[1, 2]).unwrap();
    assert_eq!(common::adjacency(&k4), k4.dense_adjacency());
    assert_eq!(k4.laplacian_row().first_row(4), vec![3.0, -1.0, -1.0, -1.0]);
}

#[test]
fn cycle_spectrum_example() {
    let l = CirculantGraph::cycle(4).unwrap().laplacian_row();
    let s = l.spectrum(4);
    for (a, b) in s.iter().zip([0.0, 2.0, 4.0, 2.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn ramp_border_effect() {
    let g = CirculantGraph::cycle(8).unwrap();
    let x = GraphSignal::from_real(&(0..8).map(|t| t as f64).collect::<Vec<_>>(), "ramp");
    let y = apply_circulant(&g.laplacian_row(), &x).unwrap().re();
    for (i, v) in y.iter().enumerate() {
        if (1..=6).contains(&i) {
            assert!(v.abs() < 1e-12, "node {i}: {v}");
        } else {
            assert!(v.abs() > 1.0, "node {i}: {v}");
        }
    }
}

#[test]
fn e_laplacian_rows() {
    let g = CirculantGraph::cycle(16).unwrap();
    let a = 2.0 * PI / 16.0;
    let r = g.e_laplacian_row(&ExponentParam::trig(a));
    assert!((r.row.coeffs()[0] - 2.0 * a.cos()).abs() < 1e-15);
    assert_eq!(r.row.coeffs()[1], -1.0);
    assert!(!r.degenerate);
    assert!(g.e_laplacian_row(&ExponentParam::trig(PI / 2.0)).degenerate);
    assert_eq!(
        g.e_laplacian_row(&ExponentParam::trig(0.0)).row,
        g.laplacian_row()
    );
    let h = CirculantGraph::unweighted(16, &[1, 2]).unwrap();
    let e = h.e_degree(&ExponentParam::hyperbolic(0.3));
    assert!(e >= h.degree());
    assert!((e - 2.0 * (0.3f64.cosh() + 0.6f64.cosh())).abs() < 1e-12);
}

#[test]
fn multiplicities() {
    let one = Complex64::new(1.0, 0.0);
    let m1 = Complex64::new(-1.0, 0.0);
    let l = SymLaurentPoly::new(vec![2.0, -1.0]);
    for k in 1..=4 {
        assert_eq!(root_multiplicity(&l.pow(k), one), 2 * k as usize);
    }
    assert_eq!(
        root_multiplicity(&SymLaurentPoly::new(vec![2.0, 1.0]), m1),
        2
    );
    assert_eq!(
        root_multiplicity(&SymLaurentPoly::new(vec![4.0, -1.0, -1.0]), m1),
        0
    );
}

#[test]
fn identity_row_is_identity() {
    let x = GraphSignal::from_real(&[1.0, -2.0, 3.5, 0.25, 7.0], "");
    let y = apply_circulant(&SymLaurentPoly::identity(), &x).unwrap();
    assert!(y.rel_error(&x) < 1e-15);
}

#[test]
fn wrong_length_is_rejected() {
    let op = CirculantOperator::new(&SymLaurentPoly::new(vec![2.0, -1.0]), 8);
    assert!(matches!(
        op.apply(&[Complex64::new(0.0, 0.0); 5]),
        Err(GwtError::SizeMismatch {
            expected: 8,
            got: 5
        })
    ));
}

#[test]
fn piecewise_polynomial_only_disturbed_near_breaks() {
    let g = CirculantGraph::unweighted(32, &[1, 2]).unwrap();
    let x = poly_signal(
        32,
        &[
            PolyPiece {
                start: 0,
                coeffs: vec![1.0, 0.5],
            },
            PolyPiece {
                start: 16,
                coeffs: vec![-3.0, 0.0, 0.01],
            },
        ],
    )
    .unwrap();
    let l = g.laplacian_row();
    let y = apply_circulant(&l.pow(2), &x).unwrap();
    let reach = 4;
    for i in (reach..16 - reach).chain(16 + reach..32 - reach) {
        assert!(y.values()[i].norm() < 1e-10, "node {i}");
    }
    assert!(poly_signal(
        32,
        &[PolyPiece {
            start: 3,
            coeffs: vec![1.0]
        }]
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_matches_dense_eigenvalues(g in graph_strategy()) {
        let mine = common::sorted(g.laplacian_row().spectrum(g.n()));
        let dense = common::sorted_eigenvalues(&common::laplacian(&g));
        for (a, b) in mine.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + g.degree()));
        }
    }

    #[test]
    fn dft_vectors_are_eigenvectors(g in graph_strategy(), j in 0usize..64) {
        let n = g.n();
        let j = j % n;
        let u = dft_vector(n, j);
        let lam = g.laplacian_row().spectrum(n)[j];
        let lu = common::matvec(&common::laplacian(&g), &u);
        let want: Vec<Complex64> = u.iter().map(|v| v * lam).collect();
        prop_assert!(common::max_abs_diff(&lu, &want) < 1e-10 * (1.0 + g.degree()));
    }

    #[test]
    fn apply_matches_dense(g in graph_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_complex(&mut rng, g.n());
        let y = apply_circulant(&g.laplacian_row(), &GraphSignal::new(x.clone(), "")).unwrap();
        let d = common::matvec(&common::laplacian(&g), &x);
        prop_assert!(common::max_abs_diff(y.values(), &d) <= 1e-12 * (1.0 + common::max_abs(&d)));
    }

    #[test]
    fn laplacian_kills_constants(g in graph_strategy()) {
        let x = GraphSignal::from_real(&vec![1.0; g.n()], "");
        let y = apply_circulant(&g.laplacian_row(), &x).unwrap();
        prop_assert!(common::max_abs(y.values()) < 1e-12 * g.degree());
    }

    #[test]
    fn powers_annihilate_polynomials_in_the_interior(g in graph_strategy(), k in 1u32..3, seed in any::<u64>()) {
        let n = g.n();
        let reach = k as usize * g.max_hop();
        prop_assume!(2 * reach < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::random_real(&mut rng, 2 * k as usize);
        let x = GraphSignal::from_real(&common::scaled_poly(n, &c), "");
        let y = apply_circulant(&g.laplacian_row().pow(k), &x).unwrap();
        for i in reach..n - reach {
            prop_assert!(y.values()[i].norm() < 1e-10 * (1.0 + g.degree()).powi(k as i32));
        }
    }

    #[test]
    fn on_grid_exponentials_are_eigenvectors_of_e_laplacian(g in graph_strategy(), j in 1usize..8) {
        let n = g.n();
        let p = ExponentParam::trig(2.0 * PI * (j % n) as f64 / n as f64);
        let row = g.e_laplacian_row(&p).row;
        let y = apply_circulant(&row, &exp_poly_signal(n, &p, &[1.0])).unwrap();
        prop_assert!(common::max_abs(y.values()) < 1e-10 * (1.0 + g.degree()));
    }

    #[test]
    fn root_multiplicity_of_powers(g in graph_strategy(), k in 1u32..4) {
        let m = root_multiplicity(&g.laplacian_row().pow(k), Complex64::new(1.0, 0.0));
        prop_assert_eq!(m, 2 * k as usize);
    }

    #[test]
    fn first_row_round_trips(g in graph_strategy()) {
        let row = g.adjacency_row();
        let back = SymLaurentPoly::from_first_row(&row.first_row(g.n()), 1e-14).unwrap();
        prop_assert_eq!(back.trimmed(0.0), row.trimmed(0.0));
    }
}
