//! Delaunay triangulation and its Gabriel and relative-neighbourhood subgraphs.
//!
//! The fast routes (`delaunay` → `gabriel` → `rng`) are cross-checked against
//! the literal O(n³) constructions in [`oracle`].

mod delaunay;
mod extract;
pub mod oracle;

pub use delaunay::{delaunay, delaunay_triangles};
pub use extract::{gabriel, in_diametral_disk, in_open_lune, rng};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point_process::PointConfiguration;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("triangulation rejected the input: {0}")]
    Insertion(String),
    #[error("graph has {graph} vertices but the configuration has {config}")]
    VertexMismatch { graph: usize, config: usize },
    #[error("expected a {expected} graph, got {got}")]
    WrongKind { expected: GraphKind, got: GraphKind },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("edge ({0}, {1}) references a vertex out of range")]
    OutOfRange(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Delaunay,
    Gabriel,
    Rng,
    /// Renormalized ℤ² bond lattice built from block events.
    Lattice,
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GraphKind::Delaunay => "delaunay",
            GraphKind::Gabriel => "gabriel",
            GraphKind::Rng => "rng",
            GraphKind::Lattice => "lattice",
        })
    }
}

impl std::str::FromStr for GraphKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delaunay" => Ok(GraphKind::Delaunay),
            "gabriel" => Ok(GraphKind::Gabriel),
            "rng" => Ok(GraphKind::Rng),
            "lattice" => Ok(GraphKind::Lattice),
            other => Err(format!(
                "unknown graph kind '{other}' (expected delaunay|gabriel|rng)"
            )),
        }
    }
}

/// Undirected simple graph on vertices `0..vertex_count`.
///
/// `edges` holds `(u, v)` with `u < v`, sorted and deduplicated; `adjacency`
/// holds sorted neighbour lists consistent with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityGraph {
    pub kind: GraphKind,
    pub vertex_count: usize,
    pub edges: Vec<(u32, u32)>,
    pub adjacency: Vec<Vec<u32>>,
}

impl ProximityGraph {
    pub fn from_edges(
        kind: GraphKind,
        vertex_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a as usize >= vertex_count || b as usize >= vertex_count {
                return Err(GraphError::OutOfRange(a, b));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in &list {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            kind,
            vertex_count,
            edges: list,
            adjacency,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency
            .get(a as usize)
            .is_some_and(|n| n.binary_search(&b).is_ok())
    }

    pub fn is_subgraph_of(&self, other: &ProximityGraph) -> bool {
        self.vertex_count == other.vertex_count
            && self.edges.iter().all(|&(a, b)| other.has_edge(a, b))
    }

    pub(crate) fn check_matches(&self, config: &PointConfiguration) -> Result<(), GraphError> {
        if self.vertex_count != config.len() {
            return Err(GraphError::VertexMismatch {
                graph: self.vertex_count,
                config: config.len(),
            });
        }
        Ok(())
    }
}

/// Builds the requested graph through the Delaunay → Gabriel → RNG chain.
pub fn build(config: &PointConfiguration, kind: GraphKind) -> Result<ProximityGraph, GraphError> {
    let del = delaunay(config)?;
    match kind {
        GraphKind::Delaunay => Ok(del),
        GraphKind::Gabriel => gabriel(config, &del),
        GraphKind::Rng => rng(config, &gabriel(config, &del)?),
        GraphKind::Lattice => Err(GraphError::WrongKind {
            expected: GraphKind::Rng,
            got: GraphKind::Lattice,
        }),
    }
}

#[cfg(test)]
mod tests;
