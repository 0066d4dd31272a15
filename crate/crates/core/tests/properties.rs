use std::collections::BTreeMap;

use proptest::prelude::*;

use atb_core::approx::{local_error, project};
use atb_core::encoding::{decode, encode, BitStream};
use atb_core::experiments::{sharp_transition_d0, table_config, unit_square_d0};
use atb_core::quadrature::TriangleRule;
use atb_core::sources::{build_counterexample_l2, build_sharp_transition};
use atb_core::tree::{
    cart_objective, cart_prune, global_error, greedy_grow, grow, read_mesh, write_mesh,
};
use atb_core::wavelet::{best_n_term, decompose, reconstruct};
use atb_core::{
    pgm, ApproxConfig, BisectionTree, CoeffMap, Domain, Edge, FunctionSource, PixelGrid, Point2,
    RefineConfig, SplitKind, StopRule, Triangle, Vector2,
};

fn sorted_leaves(tree: &BisectionTree) -> Vec<[(u64, u64); 3]> {
    let mut v: Vec<_> = tree
        .leaf_triangles()
        .iter()
        .map(|t| t.vertices.map(|p| (p.x.to_bits(), p.y.to_bits())))
        .collect();
    v.sort();
    v
}

/// Applies `(leaf pick, edge code)` pairs to the unit square.
fn random_tree(splits: &[(usize, u8)]) -> BisectionTree {
    let mut tree = BisectionTree::skeleton(&unit_square_d0()).unwrap();
    for &(pick, code) in splits {
        let leaves = tree.leaves();
        let id = leaves[pick % leaves.len()];
        let edge = Edge::from_code(code).unwrap();
        tree.split_geometry(id, edge, SplitKind::Greedy);
    }
    tree
}

fn splits() -> impl Strategy<Value = Vec<(usize, u8)>> {
    prop::collection::vec((0usize..1000, 1u8..4), 0..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_roundtrips(s in splits()) {
        let tree = random_tree(&s);
        prop_assert_eq!(tree.node_count(), 2 * tree.leaf_count() - tree.n0());
        let bits = encode(&tree);
        prop_assert_eq!(bits.len(), 2 * tree.node_count());
        prop_assert!(bits.len() <= 4 * tree.leaf_count());
        let back = decode(&BitStream::from_bytes(&bits.to_bytes()).unwrap(), &unit_square_d0()).unwrap();
        prop_assert_eq!(sorted_leaves(&tree), sorted_leaves(&back));
        prop_assert_eq!(encode(&back), bits);
    }

    #[test]
    fn mesh_text_roundtrips(s in splits()) {
        let tree = random_tree(&s);
        let text = write_mesh(&tree);
        let back = read_mesh(&text).unwrap();
        prop_assert_eq!(write_mesh(&back), text);
        prop_assert!(back.check_invariants().is_ok());
    }

    #[test]
    fn bisection_preserves_area(s in splits()) {
        let tree = random_tree(&s);
        for n in tree.nodes() {
            if let Some([a, b]) = n.children {
                prop_assert!(a > n.triangle.id && b > n.triangle.id);
                let sum = tree.node(a).triangle.area() + tree.node(b).triangle.area();
                prop_assert!((sum - n.triangle.area()).abs() <= 1e-14 * n.triangle.area().max(1e-300));
            }
        }
        let total: f64 = tree.leaf_triangles().iter().map(Triangle::area).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_roundtrips(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
        let grid = PixelGrid::from_fn(w, h, |i, j| {
            let k = seed.wrapping_mul(2654435761).wrapping_add((i * 31 + j * 17) as u64) % 256;
            k as f64 / 255.0
        });
        for bytes in [pgm::encode_p5(&grid), pgm::encode_p2(&grid)] {
            let back = pgm::decode(&bytes).unwrap();
            prop_assert_eq!((back.width(), back.height()), (w, h));
            for (a, b) in back.data().iter().zip(grid.data()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
            prop_assert_eq!(pgm::encode_p5(&back), pgm::encode_p5(&grid));
        }
    }

    /// The periodized Legendre profile is orthogonal to affine functions on
    /// every triangle whose vertex abscissae follow one of the three
    /// patterns, whatever the ordinates.
    #[test]
    fn l2_counterexample_orthogonality(
        pattern in 0usize..3,
        y in prop::array::uniform3(0.0f64..1.0),
    ) {
        let xs = [[0.0, 0.5, 1.0], [0.0, 1.0, 1.0], [0.5, 1.0, 1.0]][pattern];
        let t = Triangle::new(
            Point2::new(xs[0], y[0]),
            Point2::new(xs[1], y[1]),
            Point2::new(xs[2], y[2]),
        );
        prop_assume!(t.as_ref().is_ok_and(|t| t.area() > 1e-3));
        let f = build_counterexample_l2();
        let poly = project(&f, &t.unwrap(), &table_config()).unwrap();
        for c in poly.coeffs {
            prop_assert!(c.abs() < 1e-9, "coefficient {c}");
        }
    }

    /// `e_{A(T)}(f o A^-1)_p = |det A|^{1/p} e_T(f)_p` for the projection.
    #[test]
    fn projection_error_is_affine_covariant(
        m in prop::array::uniform4(-2.0f64..2.0),
        shift in prop::array::uniform2(-1.0f64..1.0),
        p in prop::sample::select(vec![1.0, 2.0, 3.0, f64::INFINITY]),
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.2);
        let mat = [[m[0], m[1]], [m[2], m[3]]];
        let inv = [[m[3] / det, -m[1] / det], [-m[2] / det, m[0] / det]];
        let (tx, ty) = (shift[0], shift[1]);
        let f = |x: f64, y: f64| (1.5 * x).sin() + x * y * y;
        let t = Triangle::new(Point2::new(0.1, 0.0), Point2::new(0.7, 0.2), Point2::new(0.3, 0.6)).unwrap();
        let mapped = t.map_affine(mat, Vector2::new(tx, ty));
        let g = move |x: f64, y: f64| {
            let (u, v) = (x - tx, y - ty);
            f(inv[0][0] * u + inv[0][1] * v, inv[1][0] * u + inv[1][1] * v)
        };
        let cfg = ApproxConfig::new(1, p, atb_core::Operator::Projection).unwrap();
        let e = local_error(&FunctionSource::analytic(Domain::unbounded(), f), &t, &cfg).unwrap().error;
        let e_mapped = local_error(&FunctionSource::analytic(Domain::unbounded(), g), &mapped, &cfg)
            .unwrap()
            .error;
        let factor = if p.is_infinite() { 1.0 } else { det.abs().powf(1.0 / p) };
        prop_assert!(
            (e_mapped - factor * e).abs() <= 1e-8 * e.max(1e-12) * factor.max(1.0),
            "p = {p}: {e_mapped} vs {}", factor * e
        );
    }

    /// The pruned tree is never worse than the full tree or the bare roots.
    #[test]
    fn cart_beats_trivial_subtrees(leaves in 3usize..200, lambda in 0.0f64..1e-3) {
        let f = build_sharp_transition(0.1).unwrap();
        let cfg = table_config();
        let tree = greedy_grow(&f, &sharp_transition_d0(), &cfg, &RefineConfig::default(), StopRule::MaxLeaves(leaves)).unwrap();
        let roots = cart_prune(&tree, f64::MAX, 2.0);
        prop_assert_eq!(roots.leaf_count(), 2);
        for p in [2.0, f64::INFINITY] {
            let pruned = cart_prune(&tree, lambda, p);
            let obj = cart_objective(&pruned, lambda, p);
            prop_assert!(obj <= cart_objective(&tree, lambda, p) * (1.0 + 1e-12));
            prop_assert!(obj <= cart_objective(&roots, lambda, p) * (1.0 + 1e-12));
            prop_assert!(pruned.check_invariants().is_ok());
        }
    }
}

/// Holds exactly for the projection; the composite rule resolves the
/// transition band even on the two initial triangles.
#[test]
fn greedy_error_never_increases() {
    let f = build_sharp_transition(0.2).unwrap();
    let cfg = table_config().with_quadrature(8, 3);
    let rcfg = RefineConfig::default();
    let mut tree = BisectionTree::with_errors(&f, &sharp_transition_d0(), &cfg).unwrap();
    let mut last = global_error(&tree, 2.0);
    for n in 3..400 {
        grow(&mut tree, &f, &cfg, &rcfg, StopRule::MaxLeaves(n)).unwrap();
        let e = global_error(&tree, 2.0);
        assert!(
            e <= last * (1.0 + 1e-9),
            "error went up at N = {n}: {last} -> {e}"
        );
        last = e;
    }
}

/// L^2 distance between two piecewise affine functions on the leaves of
/// `tree`, by quadrature.
fn l2_distance(tree: &BisectionTree, a: &CoeffMap, b: &CoeffMap) -> f64 {
    let ra: BTreeMap<_, _> = reconstruct(a, tree).unwrap().into_iter().collect();
    let rb: BTreeMap<_, _> = reconstruct(b, tree).unwrap().into_iter().collect();
    let rule = TriangleRule::of_order(4);
    ra.iter()
        .map(|(id, pa)| {
            let pb = &rb[id];
            rule.integrate(&tree.node(*id).triangle, |x, y| {
                (pa.eval(x, y) - pb.eval(x, y)).powi(2)
            })
        })
        .sum::<f64>()
        .sqrt()
}

/// Keeping the `n` largest wavelet coefficients is the best `n`-term choice
/// among all subsets of the nine available ones.
#[test]
fn best_n_term_matches_exhaustive_search() {
    let mut tree = BisectionTree::skeleton(&unit_square_d0()).unwrap();
    let [a, _] = tree.split_geometry(0, Edge::B, SplitKind::Newest);
    tree.split_geometry(1, Edge::B, SplitKind::Newest);
    tree.split_geometry(a, Edge::A, SplitKind::Greedy);
    let f = FunctionSource::analytic(Domain::unit_square(), |x, y| {
        (3.0 * x).exp() * (2.0 * y).sin() + x * x
    });
    let full = decompose(&f, &tree, &table_config()).unwrap();
    let entries: Vec<_> = full.wavelet_entries().collect();
    assert_eq!(entries.len(), 9);
    for n in 0..=9 {
        let greedy = l2_distance(&tree, &full, &best_n_term(&full, n));
        let mut best = f64::MAX;
        for mask in 0u32..(1 << 9) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let mut kept = CoeffMap {
                scaling: full.scaling.clone(),
                wavelet: BTreeMap::new(),
            };
            for (k, &(id, i, v)) in entries.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    kept.wavelet.entry(id).or_insert([0.0; 3])[i] = v;
                }
            }
            best = best.min(l2_distance(&tree, &full, &kept));
        }
        assert!(greedy <= best + 1e-12, "n = {n}: {greedy} > {best}");
    }
}
