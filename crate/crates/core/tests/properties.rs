mod common;

use proptest::prelude::*;

use grg_recon::bounds::{lower_bound_sets, BoundParams};
use grg_recon::graph::sample_connected_grg;
use grg_recon::{
    build_grg, candidates, phase1, reconstruct, Adjacency, Boundary, DistanceOracle, Domain, Phase, Point,
    PointSet, SeedStrategy, Topology,
};

use common::{naive_bfs, naive_candidates, naive_rows};

fn point(side: f64) -> impl Strategy<Value = Point> {
    (0.0..side, 0.0..side).prop_map(|(x, y)| Point::new(x, y))
}

fn brute_force_edges(ps: &PointSet, r: f64) -> Vec<(u32, u32)> {
    let d = ps.domain();
    let pts = ps.points();
    let mut out = Vec::new();
    for u in 0..pts.len() {
        for v in u + 1..pts.len() {
            if d.distance(pts[u], pts[v]).unwrap() <= r {
                out.push((u as u32, v as u32));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(side in 1.0..50.0f64, a in point(1.0), b in point(1.0), c in point(1.0)) {
        let scale = |p: Point| Point::new(p.x * side * 0.999, p.y * side * 0.999);
        let (a, b, c) = (scale(a), scale(b), scale(c));
        for boundary in [Boundary::Torus, Boundary::Square] {
            let d = Domain::new(side, boundary).unwrap();
            let ab = d.distance(a, b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(d.distance(a, a).unwrap(), 0.0);
            prop_assert!((ab - d.distance(b, a).unwrap()).abs() < 1e-12);
            prop_assert!(ab <= d.distance(a, c).unwrap() + d.distance(c, b).unwrap() + 1e-9);
        }
        let torus = Domain::new(side, Boundary::Torus).unwrap().distance(a, b).unwrap();
        let square = Domain::new(side, Boundary::Square).unwrap().distance(a, b).unwrap();
        prop_assert!(torus <= square + 1e-12);
        prop_assert!(torus <= side * std::f64::consts::SQRT_2 / 2.0 + 1e-9);
    }

    #[test]
    fn grid_construction_matches_brute_force(
        pts in prop::collection::vec(point(12.0), 0..120),
        r in 0.05..7.0f64,
        torus in any::<bool>(),
    ) {
        let boundary = if torus { Boundary::Torus } else { Boundary::Square };
        let ps = PointSet::from_points(pts, Domain::new(12.0, boundary).unwrap(), 0).unwrap();
        let g = build_grg(&ps, r).unwrap();
        let grid: Vec<(u32, u32)> = g.adjacency().edges().collect();
        prop_assert_eq!(grid, brute_force_edges(&ps, r));
    }

    #[test]
    fn candidates_match_naive_loop(n in 30usize..150, seeds in 1usize..8, rng_seed in any::<u64>()) {
        let (g, _) = sample_connected_grg(n, 3.0, Boundary::Torus, rng_seed, 1000).unwrap();
        let nodes = g.node_count();
        let strategy = SeedStrategy::uniform_count(seeds.min(nodes), rng_seed);
        let chosen = grg_recon::select_seeds(&g, &strategy).unwrap();
        let oracle = DistanceOracle::new(&g);
        let table = phase1(&oracle, &chosen).unwrap();
        let rows = naive_rows(g.adjacency(), &chosen);
        let cand = candidates(&table);
        prop_assert_eq!(cand.pairs().to_vec(), naive_candidates(&rows, nodes));
        prop_assert_eq!(oracle.phase1_queries(), (chosen.len() * nodes) as u64);
        prop_assert_eq!(oracle.phase2_queries(), 0);
    }

    #[test]
    fn more_seeds_never_grow_the_candidate_set(n in 40usize..200, rng_seed in any::<u64>(), extra in 1usize..6) {
        let (g, _) = sample_connected_grg(n, 2.5, Boundary::Square, rng_seed, 1000).unwrap();
        let nodes = g.node_count();
        let base: Vec<usize> = (0..3).map(|i| (i * 7919 + rng_seed as usize % 97) % nodes).collect();
        let mut more = base.clone();
        more.extend((0..extra).map(|i| (i * 104_729 + 13) % nodes));
        let oracle = DistanceOracle::new(&g);
        let small = candidates(&phase1(&oracle, &base).unwrap());
        let large = candidates(&phase1(&oracle, &more).unwrap());
        prop_assert!(large.len() <= small.len());
        for &(a, b) in large.pairs() {
            prop_assert!(small.contains(a, b));
        }
    }

    #[test]
    fn query_counter_is_exact(calls in prop::collection::vec((0usize..40, 0usize..40, any::<bool>(), any::<bool>()), 0..60)) {
        let edges: Vec<(u32, u32)> = (0..39u32).map(|i| (i, i + 1)).collect();
        let adj = Adjacency::from_edges(40, &edges).unwrap();
        let oracle = DistanceOracle::new(&adj);
        let (mut p1, mut p2) = (0u64, 0u64);
        for (u, v, row, first) in calls {
            let phase = if first { Phase::Phase1 } else { Phase::Phase2 };
            let cost = if row {
                prop_assert_eq!(oracle.query_row(u, phase).unwrap().get(v), Some(u.abs_diff(v) as u32));
                40
            } else {
                prop_assert_eq!(oracle.query(u, v, phase).unwrap(), Some(u.abs_diff(v) as u32));
                1
            };
            if first { p1 += cost } else { p2 += cost }
        }
        prop_assert_eq!(oracle.phase1_queries(), p1);
        prop_assert_eq!(oracle.phase2_queries(), p2);
        prop_assert_eq!(oracle.total_queries(), p1 + p2);
    }
}

#[test]
fn lower_bound_sets_are_disjoint_and_separated() {
    let (g, _) = sample_connected_grg(3000, 3000f64.powf(0.3), Boundary::Torus, 11, 100).unwrap();
    let p = BoundParams::new(g.node_count(), g.radius(), 1.0).unwrap();
    let mut checked = 0;
    for seed in [0, 17, 1234] {
        let row = naive_bfs(g.adjacency(), seed);
        for t in 1..6 {
            let (l, u) = lower_bound_sets(&g, &p, seed, t).unwrap();
            assert!(l.iter().all(|v| u.binary_search(v).is_err()));
            for &a in &l {
                for &b in &u {
                    let (da, db) = (row[a].unwrap(), row[b].unwrap());
                    assert!(db > da + 1, "seed {seed} t {t}: {a}@{da} vs {b}@{db}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn reconstruction_is_deterministic_for_a_seed() {
    let (g, _) = sample_connected_grg(800, 4.0, Boundary::Torus, 2, 100).unwrap();
    let strategy = SeedStrategy::thinning(0.4, 99);
    let a = reconstruct(&g, &strategy).unwrap();
    let b = reconstruct(&g, &strategy).unwrap();
    assert_eq!(a.seeds, b.seeds);
    assert_eq!(a.edges, b.edges);
    assert_eq!(a.total_queries(), b.total_queries());
    assert_eq!(a.edges, g.adjacency().edges().collect::<Vec<_>>());
}
