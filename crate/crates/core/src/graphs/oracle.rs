//! Literal constructions and checks used to validate the fast graph builders.

use robust::{incircle, orient2d, Coord};

use super::extract::{in_diametral_disk, in_open_lune};
use super::{GraphKind, ProximityGraph};
use crate::point_process::PointConfiguration;
use crate::union_find::UnionFind;

fn all_pairs_filter(
    config: &PointConfiguration,
    kind: GraphKind,
    blocked: impl Fn(usize, usize, usize) -> bool,
) -> ProximityGraph {
    let n = config.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !(0..n).any(|w| w != a && w != b && blocked(a, b, w)) {
                edges.push((a as u32, b as u32));
            }
        }
    }
    ProximityGraph::from_edges(kind, n, edges).expect("pairs are in range")
}

/// Gabriel graph straight from its definition, O(n³).
pub fn brute_force_gabriel(config: &PointConfiguration) -> ProximityGraph {
    let p = &config.points;
    all_pairs_filter(config, GraphKind::Gabriel, |a, b, w| {
        in_diametral_disk(p[w], p[a], p[b])
    })
}

/// Relative neighbourhood graph straight from its definition, O(n³).
pub fn brute_force_rng(config: &PointConfiguration) -> ProximityGraph {
    let p = &config.points;
    all_pairs_filter(config, GraphKind::Rng, |a, b, w| {
        in_open_lune(p[w], p[a], p[b], p[a].dist2(p[b]))
    })
}

fn coord(config: &PointConfiguration, i: u32) -> Coord<f64> {
    let p = config.points[i as usize];
    Coord { x: p.x, y: p.y }
}

/// Triangles whose open circumdisk contains an input point, as
/// `(triangle, offending point)`. Uses the exact incircle predicate.
pub fn circumdisk_violations(
    config: &PointConfiguration,
    triangles: &[[u32; 3]],
) -> Vec<([u32; 3], u32)> {
    let mut bad = Vec::new();
    for t in triangles {
        let (mut a, b, mut c) = (coord(config, t[0]), coord(config, t[1]), coord(config, t[2]));
        if orient2d(a, b, c) < 0.0 {
            std::mem::swap(&mut a, &mut c);
        }
        for w in 0..config.len() as u32 {
            if t.contains(&w) {
                continue;
            }
            if incircle(a, b, c, coord(config, w)) > 0.0 {
                bad.push((*t, w));
            }
        }
    }
    bad
}

/// Pairs of edges that cross at a point interior to both (exact orientation tests).
pub fn proper_crossings(config: &PointConfiguration, graph: &ProximityGraph) -> Vec<((u32, u32), (u32, u32))> {
    let mut edges: Vec<(u32, u32, f64, f64)> = graph
        .edges
        .iter()
        .map(|&(a, b)| {
            let (pa, pb) = (config.points[a as usize], config.points[b as usize]);
            (a, b, pa.x.min(pb.x), pa.x.max(pb.x))
        })
        .collect();
    edges.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut out = Vec::new();
    for i in 0..edges.len() {
        let (a, b, _, hi) = edges[i];
        for &(c, d, lo, _) in &edges[i + 1..] {
            if lo > hi {
                break;
            }
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let (pa, pb, pc, pd) = (coord(config, a), coord(config, b), coord(config, c), coord(config, d));
            let o1 = orient2d(pa, pb, pc);
            let o2 = orient2d(pa, pb, pd);
            let o3 = orient2d(pc, pd, pa);
            let o4 = orient2d(pc, pd, pb);
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                out.push(((a, b), (c, d)));
            }
        }
    }
    out
}

/// Euclidean minimum spanning tree edges (Kruskal over all pairs).
pub fn euclidean_mst(config: &PointConfiguration) -> Vec<(u32, u32)> {
    let p = &config.points;
    let n = p.len();
    let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((p[a].dist2(p[b]), a as u32, b as u32));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut uf = UnionFind::new(n);
    pairs
        .into_iter()
        .filter(|&(_, a, b)| uf.union(a, b).is_some())
        .map(|(_, a, b)| (a, b))
        .collect()
}

/// Number of connected components of `graph`.
pub fn component_count(graph: &ProximityGraph) -> usize {
    let mut uf = UnionFind::new(graph.vertex_count);
    let merges = graph.edges.iter().filter(|&&(a, b)| uf.union(a, b).is_some()).count();
    graph.vertex_count - merges
}
