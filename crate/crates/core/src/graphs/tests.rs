use super::oracle::*;
use super::*;
use crate::geometry::Point;
use crate::point_process::{sample_poisson, Window};

fn fixture(points: &[(f64, f64)]) -> PointConfiguration {
    let w = Window::square(10.0).unwrap();
    PointConfiguration::new(w, points.iter().map(|&(x, y)| Point::new(x, y)).collect(), 0).unwrap()
}

fn chain(config: &PointConfiguration) -> (ProximityGraph, ProximityGraph, ProximityGraph) {
    let d = delaunay(config).unwrap();
    let g = gabriel(config, &d).unwrap();
    let r = rng(config, &g).unwrap();
    (d, g, r)
}

#[test]
fn tiny_configurations() {
    let one = fixture(&[(1.0, 1.0)]);
    assert_eq!(delaunay(&one).unwrap().edge_count(), 0);
    assert_eq!(brute_force_gabriel(&one).edge_count(), 0);
    assert_eq!(brute_force_rng(&one).edge_count(), 0);
    let two = fixture(&[(1.0, 1.0), (2.0, 3.0)]);
    let (d, g, r) = chain(&two);
    assert_eq!((d.edge_count(), g.edge_count(), r.edge_count()), (1, 1, 1));
    assert_eq!(brute_force_rng(&two).edge_count(), 1);
    let three = fixture(&[(0.0, 0.0), (1.0, 0.0), (0.3, 2.0)]);
    assert_eq!(delaunay(&three).unwrap().edge_count(), 3);
}

#[test]
fn near_equilateral_keeps_all_gabriel_edges() {
    let cfg = fixture(&[(0.0, 0.0), (1.0, 0.0), (0.51, 0.86)]);
    let (_, g, _) = chain(&cfg);
    assert_eq!(g.edge_count(), 3);
    assert_eq!(brute_force_gabriel(&cfg), g);
}

#[test]
fn flat_triangle_drops_long_rng_edge() {
    let cfg = fixture(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.1)]);
    let (_, _, r) = chain(&cfg);
    // canonical order sorts by y: (0,0)=0, (1,0)=1, (0.5,0.1)=2
    assert!(!r.has_edge(0, 1));
    assert!(r.has_edge(0, 2) && r.has_edge(1, 2));
    assert_eq!(brute_force_rng(&cfg), r);
}

#[test]
fn collinear_input_gives_a_path() {
    let cfg = fixture(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.5, 1.0)]);
    let (d, g, r) = chain(&cfg);
    assert_eq!(d.edge_count(), 3);
    assert_eq!(g, brute_force_gabriel(&cfg));
    assert_eq!(r, brute_force_rng(&cfg));
}

#[test]
fn fast_routes_match_oracles() {
    let w = Window::square(14.0).unwrap();
    for seed in 0..15 {
        let cfg = sample_poisson(w, 1.0, seed).unwrap();
        let (d, g, r) = chain(&cfg);
        assert_eq!(g, brute_force_gabriel(&cfg), "gabriel seed {seed}");
        assert_eq!(r, brute_force_rng(&cfg), "rng seed {seed}");
        assert!(r.is_subgraph_of(&g) && g.is_subgraph_of(&d));
        let tris = delaunay_triangles(&cfg).unwrap();
        assert!(circumdisk_violations(&cfg, &tris).is_empty());
    }
}

#[test]
fn rng_structure_on_poisson_samples() {
    let w = Window::square(30.0).unwrap();
    for seed in 0..5 {
        let cfg = sample_poisson(w, 1.0, 100 + seed).unwrap();
        let (d, _, r) = chain(&cfg);
        let n = cfg.len();
        assert!(d.edge_count() <= 3 * n - 6);
        assert!(r.max_degree() <= 6);
        assert_eq!(component_count(&r), 1);
        assert!(proper_crossings(&cfg, &r).is_empty());
        for (a, b) in euclidean_mst(&cfg) {
            assert!(r.has_edge(a, b));
        }
    }
}

#[test]
fn crossing_detector_finds_crossings() {
    let cfg = fixture(&[(0.0, 0.0), (2.0, 2.0), (0.0, 2.0), (2.0, 0.1)]);
    let g = ProximityGraph::from_edges(GraphKind::Rng, 4, [(0, 3), (1, 2)]).unwrap();
    // indices after canonical sort: (0,0)=0, (2,0.1)=1, (0,2)=2, (2,2)=3
    assert_eq!(proper_crossings(&cfg, &g).len(), 1);
}

#[test]
fn kind_and_size_mismatch_rejected() {
    let cfg = fixture(&[(1.0, 1.0), (2.0, 1.0), (1.5, 2.0)]);
    let d = delaunay(&cfg).unwrap();
    assert!(rng(&cfg, &d).is_err());
    let other = fixture(&[(1.0, 1.0), (2.0, 1.0)]);
    assert!(gabriel(&other, &d).is_err());
    assert!(ProximityGraph::from_edges(GraphKind::Rng, 2, [(1, 1)]).is_err());
}
