use gsbm_core::experiment::phase1_labels;
use gsbm_core::phase2::refine_all;
use gsbm_core::theory::neighbourhood_block_bound;
use gsbm_core::{
    agreement, blocks_mutually_visible, ch_divergence_plus, ch_divergence_t, neighborhood_mistakes, occupied_blocks,
    sample_instance, BlockGrid, IntensityVector, Labeling, ModelParams, Point, PointSet, Torus, VisibilityGraph,
};
use proptest::prelude::*;

fn small_params() -> impl Strategy<Value = (ModelParams, u64)> {
    // probabilities on a 1e-3 lattice keep them exactly representable
    (0.5f64..4.0, 40.0f64..600.0, 50u32..950, 50u32..950, 1usize..=3, any::<u64>())
        .prop_filter("a != b", |(_, _, a, b, _, _)| a != b)
        .prop_map(|(lambda, n, a, b, d, seed)| {
            let (a, b) = (f64::from(a) / 1000.0, f64::from(b) / 1000.0);
            (ModelParams::from_f64(lambda, n, a, b, d).unwrap(), seed)
        })
}

fn point_in(torus: &Torus, unit: &[f64]) -> Point {
    let coords = unit.iter().map(|u| (u - 0.5) * torus.side()).collect();
    Point::new(coords, torus).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_distance_is_a_metric(
        d in 1usize..=3,
        n in 10.0f64..1e5,
        raw in prop::collection::vec(0.0f64..1.0, 9),
    ) {
        let torus = Torus::new(n, d).unwrap();
        let p = point_in(&torus, &raw[0..d]);
        let q = point_in(&torus, &raw[3..3 + d]);
        let r = point_in(&torus, &raw[6..6 + d]);
        let dist = |x: &Point, y: &Point| torus.distance(x.coords(), y.coords()).unwrap();
        prop_assert_eq!(dist(&p, &p), 0.0);
        prop_assert_eq!(dist(&p, &q), dist(&q, &p));
        prop_assert!(dist(&p, &r) <= dist(&p, &q) + dist(&q, &r) + 1e-9);
        // no coordinate gap exceeds half the side
        prop_assert!(dist(&p, &q) <= 0.5 * torus.side() * (d as f64).sqrt() + 1e-9);
    }

    #[test]
    fn sampled_graphs_respect_the_model((params, seed) in small_params()) {
        let g = sample_instance(&params, seed).unwrap();
        let r = g.visibility_radius();
        for u in 0..g.num_vertices() {
            let nb = g.neighbors(u);
            prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
            for &v in nb {
                let v = v as usize;
                prop_assert_ne!(u, v);
                prop_assert!(g.neighbors(v).binary_search(&(u as u32)).is_ok());
                prop_assert!(g.distance(u, v) <= r);
            }
        }
        prop_assert!(!g.truth().has_zeros());
        prop_assert_eq!(sample_instance(&params, seed).unwrap().num_edges(), g.num_edges());
    }

    #[test]
    fn blocks_partition_the_vertices((params, seed) in small_params(), chi in 0.05f64..2.0) {
        let g = sample_instance(&params, seed).unwrap();
        let grid = BlockGrid::build(g.positions(), params.n, params.d, chi).unwrap();
        let mut seen = vec![0u32; g.num_vertices()];
        for blk in 0..grid.num_blocks() {
            for &v in grid.vertices(blk) {
                seen[v as usize] += 1;
                prop_assert_eq!(grid.block_of_vertex(v as usize), blk);
                prop_assert_eq!(grid.block_of(g.position(v as usize)), blk);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn block_visibility_is_symmetric((params, seed) in small_params(), chi in 0.05f64..1.0) {
        let g = sample_instance(&params, seed).unwrap();
        let grid = BlockGrid::build(g.positions(), params.n, params.d, chi).unwrap();
        let m = grid.num_blocks().min(40);
        for i in 0..m {
            for j in 0..m {
                prop_assert_eq!(blocks_mutually_visible(i, j, &grid), blocks_mutually_visible(j, i, &grid));
            }
        }
    }

    #[test]
    fn visibility_graph_invariants((params, seed) in small_params(), chi in 0.1f64..1.0, delta in 0.01f64..1.0) {
        let g = sample_instance(&params, seed).unwrap();
        let grid = BlockGrid::build(g.positions(), params.n, params.d, chi).unwrap();
        let vg = VisibilityGraph::build(&grid, delta).unwrap();
        let log_n = params.n.ln();
        for &blk in &vg.occupied {
            prop_assert!(grid.vertices(blk).len() as f64 > delta * log_n);
        }
        for &(i, j) in &vg.edges {
            prop_assert_ne!(i, j);
            prop_assert!(vg.is_occupied(i) && vg.is_occupied(j));
            prop_assert!(blocks_mutually_visible(i, j, &grid));
        }
        // raising the threshold only removes blocks
        let stricter = occupied_blocks(&grid, 2.0 * delta).unwrap();
        prop_assert!(stricter.iter().all(|b| vg.occupied.contains(b)));
        if vg.connected() && !vg.occupied.is_empty() {
            let mut order = vg.order.clone();
            order.sort_unstable();
            prop_assert_eq!(&order, &vg.occupied);
            let pos = |b: usize| vg.order.iter().position(|&x| x == b).unwrap();
            for &(child, parent) in &vg.parent {
                prop_assert!(pos(parent) < pos(child));
            }
        }
        // the block structure ignores labels
        let flipped = g.with_truth(g.truth().negated()).unwrap();
        let grid2 = BlockGrid::build(flipped.positions(), params.n, params.d, chi).unwrap();
        let vg2 = VisibilityGraph::build(&grid2, delta).unwrap();
        prop_assert_eq!(&vg2.occupied, &vg.occupied);
        prop_assert_eq!(&vg2.edges, &vg.edges);
        prop_assert_eq!(&vg2.order, &vg.order);
    }

    #[test]
    fn divergence_is_nonnegative_and_mirrored(
        x in prop::array::uniform4(0.0f64..10.0),
        y in prop::array::uniform4(0.0f64..10.0),
        t in 0.0f64..=1.0,
    ) {
        let (xv, yv) = (IntensityVector::new(x).unwrap(), IntensityVector::new(y).unwrap());
        let dt = ch_divergence_t(&xv, &yv, t).unwrap();
        prop_assert!(dt >= -1e-12);
        prop_assert!((dt - ch_divergence_t(&yv, &xv, 1.0 - t).unwrap()).abs() < 1e-9);
        let (plus, arg) = ch_divergence_plus(&xv, &yv);
        prop_assert!(plus + 1e-9 >= dt);
        prop_assert!((0.0..=1.0).contains(&arg));
        prop_assert!((plus - ch_divergence_plus(&yv, &xv).0).abs() < 1e-9);
    }

    #[test]
    fn agreement_is_flip_invariant(
        pairs in prop::collection::vec((prop::sample::select(vec![-1i8, 0, 1]), prop::bool::ANY), 1..200),
    ) {
        let sigma = Labeling::new(pairs.iter().map(|p| p.0).collect()).unwrap();
        let truth = Labeling::new(pairs.iter().map(|p| if p.1 { 1 } else { -1 }).collect()).unwrap();
        let fwd = agreement(&sigma, &truth).unwrap();
        prop_assert_eq!(fwd, agreement(&sigma.negated(), &truth).unwrap());
        prop_assert!((0.5..=1.0).contains(&fwd) || sigma.has_zeros());
        prop_assert_eq!(fwd == 1.0, sigma == truth || sigma == truth.negated());
    }

    #[test]
    fn refine_is_antisymmetric_off_ties((params, seed) in small_params()) {
        let g = sample_instance(&params, seed).unwrap();
        let (a, b) = (params.a.value(), params.b.value());
        let sigma = g.truth().clone();
        let fwd = refine_all(&g, &sigma, a, b).unwrap();
        let back = refine_all(&g, &sigma.negated(), a, b).unwrap();
        for u in 0..g.num_vertices() {
            let profile = gsbm_core::degree_profile(&g, u, &sigma);
            if gsbm_core::tau(profile, a, b).unwrap() != 0.0 {
                prop_assert_eq!(back.get(u), -fwd.get(u));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// A neighbourhood meets at most kappa blocks, so its mistakes are bounded
    /// by kappa times the worst block.
    #[test]
    fn neighbourhood_mistakes_bounded_by_block_mistakes(seed in any::<u64>(), lambda in 2.5f64..4.0) {
        let params = ModelParams::from_f64(lambda, 3000.0, 0.9, 0.1, 1).unwrap();
        let g = sample_instance(&params, seed).unwrap();
        let chi = 0.5;
        let (grid, _, res) = phase1_labels(&g, chi, 1e-3).unwrap();
        prop_assume!(res.is_some());
        let res = res.unwrap();
        prop_assume!(res.per_block_mistakes.len() == grid.num_blocks());
        let sign = g.truth().get(res.root_vertex.unwrap());
        let worst_nbhd = neighborhood_mistakes(&g, &res.sigma_hat, g.truth(), sign).unwrap().into_iter().max().unwrap_or(0);
        let kappa = neighbourhood_block_bound(chi, 1).unwrap();
        prop_assert!(worst_nbhd as f64 <= kappa * res.max_block_mistakes() as f64);
    }
}

#[test]
fn empty_point_set_gives_empty_structures() {
    let grid = BlockGrid::build(&PointSet::new(2), 1e3, 2, 0.5).unwrap();
    let vg = VisibilityGraph::build(&grid, 0.1).unwrap();
    assert!(vg.occupied.is_empty() && vg.edges.is_empty() && vg.order.is_empty());
}
