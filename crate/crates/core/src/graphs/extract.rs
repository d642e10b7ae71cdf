use super::{GraphError, GraphKind, ProximityGraph};
use crate::geometry::Point;
use crate::point_process::PointConfiguration;
use crate::spatial::GridIndex;

/// `w` strictly inside the disk with diameter `uv`.
#[inline]
pub fn in_diametral_disk(w: Point, u: Point, v: Point) -> bool {
    (w.x - u.x) * (w.x - v.x) + (w.y - u.y) * (w.y - v.y) < 0.0
}

/// `w` strictly closer than `|uv|` to both endpoints.
#[inline]
pub fn in_open_lune(w: Point, u: Point, v: Point, d2: f64) -> bool {
    w.dist2(u) < d2 && w.dist2(v) < d2
}

fn expect_kind(g: &ProximityGraph, kind: GraphKind) -> Result<(), GraphError> {
    if g.kind == kind {
        Ok(())
    } else {
        Err(GraphError::WrongKind {
            expected: kind,
            got: g.kind,
        })
    }
}

/// Gabriel subgraph of a Delaunay graph.
///
/// A Delaunay edge fails the Gabriel test iff one of the vertices opposite to
/// it in the adjacent triangles lies in its diametral disk; those vertices are
/// common neighbours of both endpoints, so testing every common neighbour is
/// enough.
pub fn gabriel(config: &PointConfiguration, delaunay: &ProximityGraph) -> Result<ProximityGraph, GraphError> {
    expect_kind(delaunay, GraphKind::Delaunay)?;
    delaunay.check_matches(config)?;
    let pts = &config.points;
    let keep = delaunay.edges.iter().copied().filter(|&(a, b)| {
        let (u, v) = (pts[a as usize], pts[b as usize]);
        let (na, nb) = (&delaunay.adjacency[a as usize], &delaunay.adjacency[b as usize]);
        let (mut i, mut j) = (0, 0);
        while i < na.len() && j < nb.len() {
            match na[i].cmp(&nb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if in_diametral_disk(pts[na[i] as usize], u, v) {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    });
    ProximityGraph::from_edges(GraphKind::Gabriel, delaunay.vertex_count, keep.collect::<Vec<_>>())
}

/// Relative neighbourhood subgraph of a Gabriel graph (open-lune rule).
///
/// Witnesses are searched in a bucket grid over the disk of radius `|uv|·√3/2`
/// around the midpoint, which contains the lune.
pub fn rng(config: &PointConfiguration, gabriel: &ProximityGraph) -> Result<ProximityGraph, GraphError> {
    expect_kind(gabriel, GraphKind::Gabriel)?;
    gabriel.check_matches(config)?;
    let pts = &config.points;
    let grid = GridIndex::new(pts, config.window.bbox(), 2.0);
    let keep = gabriel.edges.iter().copied().filter(|&(a, b)| {
        let (u, v) = (pts[a as usize], pts[b as usize]);
        let d2 = u.dist2(v);
        let m = u.midpoint(v);
        let reach = d2.sqrt() * 0.866_026;
        let blocked = grid.any_near(m.x - reach, m.y - reach, m.x + reach, m.y + reach, |w| {
            w != a && w != b && in_open_lune(pts[w as usize], u, v, d2)
        });
        !blocked
    });
    ProximityGraph::from_edges(GraphKind::Rng, gabriel.vertex_count, keep.collect::<Vec<_>>())
}
