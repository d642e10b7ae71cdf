use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use super::{GraphError, GraphKind, ProximityGraph};
use crate::point_process::PointConfiguration;

struct Indexed {
    pos: Point2<f64>,
    index: u32,
}

impl HasPosition for Indexed {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

fn triangulate(config: &PointConfiguration) -> Result<DelaunayTriangulation<Indexed>, GraphError> {
    let vertices = config
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| Indexed {
            pos: Point2::new(p.x, p.y),
            index: i as u32,
        })
        .collect();
    DelaunayTriangulation::bulk_load(vertices).map_err(|e| GraphError::Insertion(format!("{e:?}")))
}

/// Delaunay edge set. One or two points give the complete graph on them;
/// all-collinear inputs give the path along the line.
pub fn delaunay(config: &PointConfiguration) -> Result<ProximityGraph, GraphError> {
    let n = config.len();
    if n < 3 {
        let edges = if n == 2 { vec![(0, 1)] } else { vec![] };
        return ProximityGraph::from_edges(GraphKind::Delaunay, n, edges);
    }
    let tri = triangulate(config)?;
    let edges = tri.undirected_edges().map(|e| {
        let [a, b] = e.vertices();
        (a.data().index, b.data().index)
    });
    ProximityGraph::from_edges(GraphKind::Delaunay, n, edges)
}

/// Delaunay triangles as vertex-index triples (counter-clockwise).
pub fn delaunay_triangles(config: &PointConfiguration) -> Result<Vec<[u32; 3]>, GraphError> {
    if config.len() < 3 {
        return Ok(Vec::new());
    }
    let tri = triangulate(config)?;
    Ok(tri
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.data().index))
        .collect())
}
