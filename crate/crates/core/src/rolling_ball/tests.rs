use super::*;
use proptest::prelude::*;

fn local_config(region: &TwoSquareRegion, pts: Vec<Point>) -> PointConfiguration {
    PointConfiguration::new(region.window(), pts, 0).unwrap()
}

#[test]
fn region_geometry() {
    let g = TwoSquareRegion::new(2.0, 1.0).unwrap();
    assert_eq!(g.side, 6.0);
    assert_eq!((g.c1, g.c2), (Point::new(3.0, 3.0), Point::new(9.0, 3.0)));
    assert!(g.in_band(Point::new(6.0, 4.9)));
    assert!(!g.in_band(Point::new(6.0, 5.0)));
    assert!(g.in_capsule(Point::new(1.5, 3.0)));
    assert!(!g.in_capsule(Point::new(0.5, 3.0)));
    assert!(TwoSquareRegion::new(0.0, 1.0).is_err());
}

#[test]
fn rolling_disk_touches_v_and_stays_in_capsule() {
    let g = TwoSquareRegion::new(2.0, 2.0).unwrap();
    for &(x, y) in &[(3.0, 4.0), (4.5, 4.5), (6.0, 2.2), (11.0, 4.0), (13.5, 4.0)] {
        let v = Point::new(x, y);
        let d = g.rolling_disk(v).unwrap();
        assert!((d.center.y - g.c1.y).abs() < 1e-15);
        assert!(d.center.x >= g.c1.x && d.center.x <= g.c2.x);
        if d.center.x < g.c2.x {
            assert!((d.center.dist(v) - g.r).abs() < 1e-12);
        } else {
            assert!(g.in_c2(v));
        }
    }
    assert!(g.rolling_disk(Point::new(0.1, 0.1)).is_none());
}

#[test]
fn orientation_transforms_are_rotations() {
    let r = TwoSquareRegion::placed(1.0, 1.0, Point::new(8.0, 12.0), Orientation::North).unwrap();
    let (a, b) = (Point::new(9.0, 13.0), Point::new(10.5, 17.0));
    assert!((r.to_local(a).dist(r.to_local(b)) - a.dist(b)).abs() < 1e-12);
    // North: the square above maps to local S2
    assert_eq!(r.to_local(Point::new(10.0, 18.0)), Point::new(6.0, 2.0));
    for o in [Orientation::East, Orientation::West, Orientation::North, Orientation::South] {
        let g = TwoSquareRegion::placed(1.0, 1.0, Point::new(0.0, 0.0), o).unwrap();
        let q = g.to_local(Point::new(1.0, 3.0));
        let p = g.to_local(Point::new(2.5, 0.5));
        assert!((q.dist(p) - Point::new(1.0, 3.0).dist(Point::new(2.5, 0.5))).abs() < 1e-12);
    }
    assert_eq!(Orientation::between((1, 1), (1, 0)), Some(Orientation::South));
    assert_eq!(Orientation::between((1, 1), (2, 2)), None);
}

#[test]
fn empty_configuration_events() {
    let g = TwoSquareRegion::new(1.0, 1.0).unwrap();
    let c = local_config(&g, vec![]);
    assert!(test_event_e(&g, &c).unwrap());
    assert!(test_good_event(&g, &c).unwrap());
    let ev = test_events_f_a(&g, &c, 3).unwrap();
    assert_eq!(ev, CountEvents { f1: false, f2: false, a_m: true });
}

#[test]
fn single_point_in_c1_fails_e() {
    let g = TwoSquareRegion::new(1.0, 1.0).unwrap();
    let c = local_config(&g, vec![g.c1]);
    assert!(!test_event_e(&g, &c).unwrap());
    assert!(!test_good_event(&g, &c).unwrap());
    let ev = test_events_f_a(&g, &c, 0).unwrap();
    assert!(ev.f1 && !ev.f2 && !ev.a_m);
}

#[test]
fn hand_built_chain_passes_everything() {
    let g = TwoSquareRegion::new(1.0, 1.0).unwrap();
    let pts: Vec<Point> = (0..=10).map(|k| Point::new(2.0 + 0.5 * k as f64, 2.0)).collect();
    let c = local_config(&g, pts);
    let sample = RegionSample::new(g, &c).unwrap();
    assert!(sample.event_e());
    assert!(sample.good_event());
    let paths = sample.c1_paths().unwrap();
    assert!(!paths.is_empty());
    assert!(paths.iter().all(|p| sample.path_is_valid(p)));
}

#[test]
fn uncertifiable_edges_are_not_used() {
    let g = TwoSquareRegion::new(1.0, 1.0).unwrap();
    // C1 and C2 vertices joined only through a long edge hugging the top border
    let pts = vec![g.c1, Point::new(2.0, 3.9), Point::new(6.0, 3.9), g.c2];
    let sample = RegionSample::new(g, &local_config(&g, pts)).unwrap();
    assert!(!sample.region.edge_certifiable(Point::new(2.0, 3.9), Point::new(6.0, 3.9)));
    assert!(!sample.good_event());
}

#[test]
fn containment_and_paths_on_random_samples() {
    let g = TwoSquareRegion::new(2.0, 2.0).unwrap();
    let m = bounds::default_m(2.0, 2.0);
    let mut allevents = 0;
    for i in 0..300 {
        let o = replica_outcome(&g, m, 7, i).unwrap();
        assert!(!o.containment_violation, "replica {i}");
        if o.e && o.counts.f1 && o.counts.f2 && o.counts.a_m {
            allevents += 1;
            assert!(o.paths_built, "replica {i}");
        }
    }
    assert!(allevents > 0);
}

#[test]
fn void_probability_of_c1() {
    // r small enough that emptiness is common: e^{-π/4} ≈ 0.456
    let st = event_statistics(0.5, 0.5, 10, 10_000, 3, 1e-8).unwrap();
    let expected = (-std::f64::consts::PI * 0.25).exp();
    assert!((st.f_fail.p - expected).abs() < 3.0 * st.f_fail.std_err, "{:?}", st.f_fail);
    assert!((st.f2_fail.p - expected).abs() < 3.0 * st.f2_fail.std_err);
}

#[test]
fn simulated_p_rn_below_bounds() {
    for (r, seed) in [(2.0, 1u64), (3.0, 2)] {
        let mc = simulate_p_rn(r, r, 20_000, seed).unwrap();
        let first = bounds::p_rn_bound(r, r, 1e-10).unwrap().log_value.exp();
        let fin = bounds::p_rn_bound_final_form(r, r, 1e-10).unwrap().value;
        assert!(mc.at_most(first, 3.0, 20_000), "r={r} mc {mc:?} first {first}");
        assert!(mc.at_most(fin, 3.0, 20_000), "r={r} mc {mc:?} final {fin}");
    }
}

#[test]
fn simulate_p_rn_is_deterministic() {
    assert_eq!(simulate_p_rn(1.0, 1.0, 500, 4).unwrap(), simulate_p_rn(1.0, 1.0, 500, 4).unwrap());
}

#[test]
fn lattice_coverage_checked() {
    let cfg = sample_poisson(Window::square(10.0).unwrap(), 1.0, 1).unwrap();
    let e = build_renormalized_lattice(&cfg, 1.0, 1.0, (3, 1));
    assert!(matches!(e, Err(RollingBallError::InsufficientCoverage { .. })));
}

#[test]
fn empty_sample_opens_every_edge() {
    let cfg = PointConfiguration::new(Window::new(0.0, 0.0, 24.0, 16.0).unwrap(), vec![], 0).unwrap();
    let lat = build_renormalized_lattice(&cfg, 1.0, 1.0, (6, 4)).unwrap();
    assert_eq!(lat.edges.len(), 5 * 4 + 6 * 3);
    assert!(lat.edge_open.iter().all(|&o| o));
}

#[test]
fn dense_fixture_opens_single_edge() {
    let (r, s) = (1.0, 1.0);
    let pts: Vec<Point> = (0..=32).map(|k| Point::new(0.5 + 0.234375 * k as f64, 2.0)).collect();
    let cfg = PointConfiguration::new(Window::new(0.0, 0.0, 8.0, 4.0).unwrap(), pts, 0).unwrap();
    let lat = build_renormalized_lattice(&cfg, r, s, (2, 1)).unwrap();
    assert_eq!(lat.edges, vec![LatticeEdge { a: (0, 0), b: (1, 0) }]);
    assert_eq!(lat.edge_open, vec![true]);
    let g = lat.grid_graph();
    assert_eq!(g.edges, vec![(0, 1)]);
    assert_eq!(lat.bond_marks().marks, vec![true]);
}

#[test]
fn lattice_edges_match_isolated_recomputation() {
    let cfg = sample_poisson(Window::new(0.0, 0.0, 40.0, 24.0).unwrap(), 1.0, 11).unwrap();
    let lat = build_renormalized_lattice(&cfg, 1.0, 1.0, (5, 3)).unwrap();
    for (e, &open) in lat.edges.iter().zip(&lat.edge_open) {
        assert_eq!(lat.edge_state_isolated(&cfg, *e).unwrap(), open, "{e:?}");
    }
    assert!(lat.open_count() > 0 && lat.open_count() < lat.edges.len());
}

#[test]
fn lattice_feeds_bond_percolation() {
    let cfg = sample_poisson(Window::new(0.0, 0.0, 48.0, 48.0).unwrap(), 1.0, 5).unwrap();
    let lat = build_renormalized_lattice(&cfg, 1.5, 1.5, (8, 8)).unwrap();
    let labels = crate::percolation::open_clusters(&lat.grid_graph(), &lat.bond_marks()).unwrap();
    assert_eq!(labels.cluster_id.len(), 64);
    assert!(labels.largest_size >= 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outside_points_never_matter(seed in 0u64..10_000, extra in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40)) {
        let (r, s) = (1.0, 1.0);
        // region occupies squares (1,1)-(2,1) of a 4x3 grid of side 4
        let big = Window::new(0.0, 0.0, 16.0, 12.0).unwrap();
        let base = sample_poisson(big, 1.0, seed).unwrap();
        let region = TwoSquareRegion::placed(r, s, Point::new(4.0, 4.0), Orientation::East).unwrap();
        let inside = |p: Point| p.x >= 4.0 && p.x <= 12.0 && p.y >= 4.0 && p.y <= 8.0;
        let mut pts = base.points.clone();
        pts.extend(extra.iter().map(|&(u, v)| Point::new(u * 16.0, v * 12.0)).filter(|&p| !inside(p)));
        pts.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
        pts.dedup();
        let aug = PointConfiguration::new(big, pts, seed).unwrap();
        let a = RegionSample::new(region, &base).unwrap();
        let b = RegionSample::new(region, &aug).unwrap();
        prop_assert_eq!(a.event_e(), b.event_e());
        prop_assert_eq!(a.good_event(), b.good_event());
    }

    #[test]
    fn orientation_does_not_change_event_statistics(seed in 0u64..10_000) {
        // the same local picture read through two placements gives the same events
        let east = TwoSquareRegion::new(1.0, 1.0).unwrap();
        let local = sample_region(&east, seed, 0).unwrap();
        let west = TwoSquareRegion::placed(1.0, 1.0, Point::new(0.0, 0.0), Orientation::West).unwrap();
        // world points whose West-local image equals the East-local picture
        let world: Vec<Point> = local.points.iter().map(|p| Point::new(4.0 - p.x, 4.0 - p.y)).collect();
        let a = RegionSample::from_points(east, &local.points).unwrap();
        let b = RegionSample::from_points(west, &world).unwrap();
        prop_assert_eq!(a.event_e(), b.event_e());
        prop_assert_eq!(a.good_event(), b.good_event());
    }
}
