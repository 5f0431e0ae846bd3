mod common;

use gwt_core::approx::{
    bandwidth, circulant_projection_row, fiedler_bipartition, image_graph, nearest_circulant,
    nearest_circulant_detailed, nearest_kron_circulant, rcm_relabel, sort_relabel, total_variation,
    DenseGraph, ImageMode, RelabelMethod, Relabelling,
};
use gwt_core::products::{ProductGraph, ProductKind};
use gwt_core::{CirculantGraph, GraphSignal, GwtError};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circulant_from_row(row: &[f64]) -> DMatrix<f64> {
    let n = row.len();
    DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n])
}

fn random_symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(0.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

fn random_sparse(rng: &mut impl Rng, n: usize, p: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    a
}

fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

#[test]
fn circulant_input_is_a_fixed_point() {
    let g = CirculantGraph::new(
        10,
        vec![
            gwt_core::Generator { s: 1, w: 1.5 },
            gwt_core::Generator { s: 3, w: 0.25 },
            gwt_core::Generator { s: 5, w: 2.0 },
        ],
    )
    .unwrap();
    let a = DenseGraph::new(common::adjacency(&g)).unwrap();
    let back = nearest_circulant(&a, &Relabelling::identity(10)).unwrap();
    assert_eq!(common::adjacency(&back), common::adjacency(&g));
}

#[test]
fn three_node_diagonal_mean() {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 2.0, 0.0, 4.0, 0.0, 4.0, 0.0]);
    let g = nearest_circulant(&DenseGraph::new(a).unwrap(), &Relabelling::identity(3)).unwrap();
    assert_eq!(g.gens().len(), 1);
    assert!((common::adjacency(&g)[(0, 1)] - 2.0).abs() < 1e-15);
}

#[test]
fn projection_is_frobenius_nearest() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_symmetric(&mut rng, 9);
    let proj = circulant_from_row(&circulant_projection_row(&a));
    let best = (&a - &proj).norm();
    for _ in 0..1000 {
        let row: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = circulant_from_row(&row);
        assert!(best <= (&a - c).norm() + 1e-12);
    }
}

#[test]
fn negative_means_are_clamped() {
    let mut a = DMatrix::zeros(6, 6);
    for i in 0..6 {
        let j = (i + 1) % 6;
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
        let k = (i + 2) % 6;
        a[(i, k)] = -0.5;
        a[(k, i)] = -0.5;
    }
    let r = nearest_circulant_detailed(&a, &Relabelling::identity(6)).unwrap();
    assert_eq!(r.clamped, vec![2]);
    assert!((r.row[2] + 0.5).abs() < 1e-15);
    assert_eq!(r.graph.gens().len(), 1);
}

#[test]
fn asymmetric_input_rejected() {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    assert!(matches!(
        nearest_circulant_detailed(&a, &Relabelling::identity(3)),
        Err(GwtError::InvalidGraph(_))
    ));
    assert!(DenseGraph::new(a).is_err());
}

#[test]
fn relabelling_validation() {
    assert!(Relabelling::new(vec![0, 2, 1], RelabelMethod::Rcm).is_ok());
    assert!(Relabelling::new(vec![0, 0, 1], RelabelMethod::Rcm).is_err());
    assert!(Relabelling::new(vec![0, 3, 1], RelabelMethod::Rcm).is_err());
    let r = Relabelling::new(vec![2, 0, 1], RelabelMethod::Sort).unwrap();
    let x = GraphSignal::from_real(&[10.0, 20.0, 30.0], "");
    assert_eq!(r.apply_signal(&x).re(), vec![30.0, 10.0, 20.0]);
    assert_eq!(r.undo_signal(&r.apply_signal(&x)), x);
    assert_eq!(r.inverse(), vec![1, 2, 0]);
}

#[test]
fn rcm_keeps_banded_matrices_banded() {
    let g = CirculantGraph::unweighted(20, &[1, 2]).unwrap();
    let mut a = common::adjacency(&g);
    // Break the wrap so the matrix is genuinely banded.
    for i in 0..20usize {
        for j in 0..20 {
            if i.abs_diff(j) > 2 {
                a[(i, j)] = 0.0;
            }
        }
    }
    let r = rcm_relabel(&DenseGraph::new(a.clone()).unwrap());
    assert!(bandwidth(&r.apply_matrix(&a)) <= bandwidth(&a));
}

#[test]
fn rcm_reduces_random_sparse_bandwidth() {
    let mut reduced = 0;
    let mut circ_ok = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(&mut rng, 64, 0.05);
        let dg = DenseGraph::new(a.clone()).unwrap();
        let r = rcm_relabel(&dg);
        let b = bandwidth(&r.apply_matrix(&a));
        assert!(b <= bandwidth(&a));
        if b < bandwidth(&a) {
            reduced += 1;
        }
        let id = nearest_circulant(&dg, &Relabelling::identity(64)).unwrap();
        let rc = nearest_circulant(&dg, &r).unwrap();
        if rc.max_hop() <= id.max_hop() {
            circ_ok += 1;
        }
    }
    assert!(reduced >= 45, "{reduced}/50");
    assert_eq!(circ_ok, 50);
}

#[test]
fn rcm_recovers_a_shuffled_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 30;
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut rng);
    let mut a = DMatrix::zeros(n, n);
    for w in labels.windows(2) {
        a[(w[0], w[1])] = 1.0;
        a[(w[1], w[0])] = 1.0;
    }
    assert!(bandwidth(&a) > 1);
    let r = rcm_relabel(&DenseGraph::new(a.clone()).unwrap());
    assert_eq!(bandwidth(&r.apply_matrix(&a)), 1);
}

#[test]
fn rcm_handles_components() {
    let mut a = DMatrix::zeros(6, 6);
    for (i, j) in [(0, 3), (3, 5), (1, 4), (2, 4)] {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    let r = rcm_relabel(&DenseGraph::new(a.clone()).unwrap());
    assert!(Relabelling::new(r.perm.clone(), r.method).is_ok());
    assert!(bandwidth(&r.apply_matrix(&a)) <= bandwidth(&a));
}

#[test]
fn sort_relabel_examples() {
    let r = sort_relabel(&GraphSignal::from_real(&[3.0, 1.0, 2.0], "")).unwrap();
    assert_eq!(r.perm, vec![1, 2, 0]);
    let r = sort_relabel(&GraphSignal::from_real(&[-1.0, 0.0, 0.0, 5.0], "")).unwrap();
    assert_eq!(r.perm, vec![0, 1, 2, 3]);
    let z = GraphSignal::new(vec![num_complex::Complex64::new(1.0, 1.0)], "");
    assert!(sort_relabel(&z).is_err());
}

#[test]
fn kron_recovers_exact_products() {
    let c4 = CirculantGraph::cycle(4).unwrap();
    let c8 = CirculantGraph::cycle(8).unwrap();
    let a = common::kron(&common::adjacency(&c4), &common::adjacency(&c8));
    let k = nearest_kron_circulant(&DenseGraph::new(a.clone()).unwrap(), 4, 8).unwrap();
    assert!(k.residual <= 1e-9, "{}", k.residual);
    let hops = |g: &CirculantGraph| g.gens().iter().map(|x| x.s).collect::<Vec<_>>();
    let (g1, g2) = (k.g1.unwrap(), k.g2.unwrap());
    assert_eq!(hops(&g1), vec![1]);
    assert_eq!(hops(&g2), vec![1]);
    let rebuilt = common::kron(&common::adjacency(&g1), &common::adjacency(&g2));
    assert!((rebuilt - a).amax() < 1e-9);
    let n1 = common::adjacency(&g1).norm();
    let n2 = common::adjacency(&g2).norm();
    assert!((n1 - n2).abs() < 1e-9 * n1);
}

#[test]
fn kron_cannot_represent_cartesian() {
    let pg = ProductGraph::new(
        ProductKind::Cartesian,
        CirculantGraph::cycle(4).unwrap(),
        CirculantGraph::cycle(5).unwrap(),
    );
    let a = pg.dense_adjacency(false).unwrap();
    let k = nearest_kron_circulant(&DenseGraph::new(a.clone()).unwrap(), 4, 5).unwrap();
    assert!(k.residual > 1e-3);
    // The Cartesian support is disjoint from every Kronecker term.
    assert!((k.residual - a.norm()).abs() < 1e-9);
    assert!(k.g1.is_none() || k.g2.is_none());
}

#[test]
fn kron_dimension_mismatch() {
    let a = common::adjacency(&CirculantGraph::cycle(12).unwrap());
    let dg = DenseGraph::new(a).unwrap();
    assert!(nearest_kron_circulant(&dg, 5, 2).is_err());
    assert!(nearest_kron_circulant(&dg, 3, 4).is_ok());
}

#[test]
fn fiedler_splits_two_cliques() {
    let n = 10;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && (i < 5) == (j < 5) {
                a[(i, j)] = 1.0;
            }
        }
    }
    a[(4, 5)] = 1.0;
    a[(5, 4)] = 1.0;
    let b = fiedler_bipartition(&DenseGraph::new(a).unwrap()).unwrap();
    let mut sides = [b.left.clone(), b.right.clone()];
    sides.sort();
    assert_eq!(sides, [vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]);
    assert!(!b.degenerate);
}

#[test]
fn fiedler_on_a_cycle_gives_two_arcs() {
    let a = common::adjacency(&CirculantGraph::cycle(8).unwrap());
    let b = fiedler_bipartition(&DenseGraph::new(a).unwrap()).unwrap();
    assert_eq!((b.left.len(), b.right.len()), (4, 4));
    for side in [&b.left, &b.right] {
        // Contiguous on the ring: exactly one cyclic successor leaves the set.
        let exits = side
            .iter()
            .filter(|&&i| !side.contains(&((i + 1) % 8)))
            .count();
        assert_eq!(exits, 1, "{side:?}");
    }
    assert!(b.degenerate);
}

#[test]
fn fiedler_on_complete_graph_is_degenerate() {
    let a = common::adjacency(&CirculantGraph::unweighted(6, &[1, 2, 3]).unwrap());
    let b = fiedler_bipartition(&DenseGraph::new(a).unwrap()).unwrap();
    assert!(b.degenerate);
    assert_eq!(b.left.len() + b.right.len(), 6);
}

#[test]
fn fiedler_needs_a_connected_graph() {
    let a = common::adjacency(&CirculantGraph::unweighted(8, &[2]).unwrap());
    assert!(matches!(
        fiedler_bipartition(&DenseGraph::new(a).unwrap()),
        Err(GwtError::Disconnected(_))
    ));
}

#[test]
fn constant_image_weights() {
    let g = image_graph(&[7.0; 12], (3, 4), 1.5, None, ImageMode::Bilateral, None).unwrap();
    let a = g.adjacency();
    for p in 0..12 {
        for q in 0..12 {
            let d2 = ((p / 4) as f64 - (q / 4) as f64).powi(2)
                + ((p % 4) as f64 - (q % 4) as f64).powi(2);
            let want = if p != q && d2 <= 2.0 {
                (-d2 / 2.25).exp()
            } else {
                0.0
            };
            assert!((a[(p, q)] - want).abs() < 1e-15);
        }
    }
}

#[test]
fn two_level_image_splits() {
    let img = [0.0, 0.0, 10.0, 10.0, 0.0, 0.0, 10.0, 10.0];
    let g = image_graph(
        &img,
        (2, 4),
        1.0,
        Some(2.0),
        ImageMode::IntensityOnly,
        Some(5.0),
    )
    .unwrap();
    let mut comps = g.components();
    comps.sort();
    assert_eq!(comps, vec![vec![0, 1, 4, 5], vec![2, 3, 6, 7]]);
    let joined = image_graph(
        &img,
        (2, 4),
        1.0,
        Some(2.0),
        ImageMode::IntensityOnly,
        Some(10.0),
    )
    .unwrap();
    assert!(joined.is_connected());
}

#[test]
fn image_graph_shapes() {
    let g = image_graph(
        &[1.0, 2.0, 3.0, 4.0],
        (2, 2),
        1.0,
        None,
        ImageMode::Bilateral,
        None,
    )
    .unwrap();
    let edges = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .filter(|&(i, j)| g.adjacency()[(i, j)] > 0.0)
        .count();
    assert_eq!(edges, 6);
    assert!(image_graph(&[1.0; 5], (2, 2), 1.0, None, ImageMode::Bilateral, None).is_err());
    assert!(image_graph(&[1.0; 4], (2, 2), 1.0, None, ImageMode::IntensityOnly, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_orthogonal_and_idempotent(n in 3usize..16, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(&mut rng, n);
        let p = circulant_from_row(&circulant_projection_row(&a));
        let pp = circulant_from_row(&circulant_projection_row(&p));
        prop_assert!((&p - pp).amax() < 1e-14);
        let r = &a - &p;
        for _ in 0..5 {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            prop_assert!(frob(&r, &circulant_from_row(&row)).abs() < 1e-12);
        }
    }

    #[test]
    fn sorting_never_increases_variation(n in 1usize..60, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let x = GraphSignal::from_real(&v, "");
        let r = sort_relabel(&x).unwrap();
        let s = r.apply_signal(&x).re();
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(total_variation(&s) <= total_variation(&v) + 1e-12);
    }

    #[test]
    fn rcm_is_a_permutation_that_never_widens(n in 2usize..40, p in 0.02f64..0.3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(&mut rng, n, p);
        let r = rcm_relabel(&DenseGraph::new(a.clone()).unwrap());
        prop_assert!(Relabelling::new(r.perm.clone(), r.method).is_ok());
        prop_assert!(bandwidth(&r.apply_matrix(&a)) <= bandwidth(&a));
    }

    #[test]
    fn kron_history_is_nonincreasing(n1 in 2usize..6, n2 in 2usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(&mut rng, n1 * n2);
        let k = nearest_kron_circulant(&DenseGraph::new(a).unwrap(), n1, n2).unwrap();
        for w in k.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-14, "{:?}", k.history);
        }
    }
}
