//! Open clusters, left-right crossings and finite-window threshold estimates.
//!
//! Marks are coupled: every site (or bond) carries one uniform and is open iff
//! its uniform is below `p`. For one replica the set of `p` at which the window
//! is crossed is therefore an interval `(t, 1]`, and `t` is found exactly by
//! adding items in increasing uniform order and watching the union-find roots
//! (the Newman–Ziff insertion scheme). Sweeps and threshold estimates are
//! built from these per-replica crossing thresholds.

use std::collections::VecDeque;
use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{self, GraphError, GraphKind, ProximityGraph};
use crate::point_process::{
    bond_uniform, sample_poisson, site_uniform, MarkMode, MarkedConfiguration, PointConfiguration,
    PointProcessError, Window,
};
use crate::seed;
use crate::union_find::UnionFind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error("marks cover {got} items but the graph has {expected} {mode}s")]
    SizeMismatch {
        expected: usize,
        got: usize,
        mode: MarkMode,
    },
    #[error("confidence interval width {width:.5} still exceeds {target:.5} after {replicas} replicas")]
    BudgetExhausted {
        width: f64,
        target: f64,
        replicas: usize,
    },
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    PointProcess(#[from] PointProcessError),
}

/// Partition of the open sites into clusters.
///
/// Cluster ids are dense and assigned in order of each cluster's smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterLabeling {
    pub cluster_id: Vec<Option<u32>>,
    pub cluster_sizes: Vec<usize>,
    pub largest_size: usize,
    pub open_count: usize,
}

impl ClusterLabeling {
    pub fn cluster_count(&self) -> usize {
        self.cluster_sizes.len()
    }

    fn from_roots(roots: impl Iterator<Item = Option<u32>>, n: usize) -> Self {
        let mut remap = vec![u32::MAX; n];
        let mut sizes = Vec::new();
        let cluster_id: Vec<Option<u32>> = roots
            .map(|root| {
                root.map(|r| {
                    let slot = &mut remap[r as usize];
                    if *slot == u32::MAX {
                        *slot = sizes.len() as u32;
                        sizes.push(0);
                    }
                    sizes[*slot as usize] += 1;
                    *slot
                })
            })
            .collect();
        let open_count = cluster_id.iter().flatten().count();
        Self {
            largest_size: sizes.iter().copied().max().unwrap_or(0),
            cluster_sizes: sizes,
            cluster_id,
            open_count,
        }
    }
}

fn check_marks(graph: &ProximityGraph, marks: &MarkedConfiguration) -> Result<(), PercolationError> {
    let expected = match marks.mode {
        MarkMode::Site => graph.vertex_count,
        MarkMode::Bond => graph.edge_count(),
    };
    if marks.len() != expected {
        return Err(PercolationError::SizeMismatch {
            expected,
            got: marks.len(),
            mode: marks.mode,
        });
    }
    Ok(())
}

fn vertex_open(marks: &MarkedConfiguration, v: usize) -> bool {
    marks.mode == MarkMode::Bond || marks.marks[v]
}

/// Connected components of the open subgraph, by union-find.
///
/// Site mode keeps edges between open sites; bond mode keeps open edges and
/// treats every vertex as occupied.
pub fn open_clusters(
    graph: &ProximityGraph,
    marks: &MarkedConfiguration,
) -> Result<ClusterLabeling, PercolationError> {
    check_marks(graph, marks)?;
    let n = graph.vertex_count;
    let mut uf = UnionFind::new(n);
    for (e, &(a, b)) in graph.edges.iter().enumerate() {
        let open = match marks.mode {
            MarkMode::Site => marks.marks[a as usize] && marks.marks[b as usize],
            MarkMode::Bond => marks.marks[e],
        };
        if open {
            uf.union(a, b);
        }
    }
    let roots: Vec<Option<u32>> = (0..n)
        .map(|v| vertex_open(marks, v).then(|| uf.find(v as u32)))
        .collect();
    Ok(ClusterLabeling::from_roots(roots.into_iter(), n))
}

/// Breadth-first labeling with the same id convention as [`open_clusters`].
pub fn bfs_clusters(
    graph: &ProximityGraph,
    marks: &MarkedConfiguration,
) -> Result<ClusterLabeling, PercolationError> {
    check_marks(graph, marks)?;
    let n = graph.vertex_count;
    // open-edge adjacency
    let mut open_adj = vec![Vec::new(); n];
    for (e, &(a, b)) in graph.edges.iter().enumerate() {
        let open = match marks.mode {
            MarkMode::Site => marks.marks[a as usize] && marks.marks[b as usize],
            MarkMode::Bond => marks.marks[e],
        };
        if open {
            open_adj[a as usize].push(b);
            open_adj[b as usize].push(a);
        }
    }
    let mut label: Vec<Option<u32>> = vec![None; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start].is_some() || !vertex_open(marks, start) {
            continue;
        }
        label[start] = Some(next);
        queue.push_back(start as u32);
        while let Some(v) = queue.pop_front() {
            for &w in &open_adj[v as usize] {
                if label[w as usize].is_none() {
                    label[w as usize] = Some(next);
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    Ok(ClusterLabeling::from_roots(label.into_iter(), n))
}

/// Default boundary layer: two typical nearest-neighbour spacings.
pub fn default_delta(intensity: f64) -> f64 {
    2.0 / intensity.sqrt()
}

const LEFT: u8 = 1;
const RIGHT: u8 = 2;

fn side_flags(config: &PointConfiguration, delta: f64) -> Vec<u8> {
    let w = config.window;
    config
        .points
        .iter()
        .map(|p| {
            let mut f = 0;
            if p.x - w.x0 <= delta {
                f |= LEFT;
            }
            if w.x1 - p.x <= delta {
                f |= RIGHT;
            }
            f
        })
        .collect()
}

/// True iff one open cluster has a site within `delta` of the left edge and
/// one within `delta` of the right edge of the configuration's window.
pub fn crossing(config: &PointConfiguration, labeling: &ClusterLabeling, delta: f64) -> bool {
    let flags = side_flags(config, delta);
    let mut seen = vec![0u8; labeling.cluster_count()];
    for (v, id) in labeling.cluster_id.iter().enumerate() {
        if let Some(c) = id {
            seen[*c as usize] |= flags[v];
            if seen[*c as usize] == LEFT | RIGHT {
                return true;
            }
        }
    }
    false
}

/// Smallest `t` such that the window is crossed for every `p > t` under the
/// coupled `uniforms`. `+∞` when no crossing ever forms, `−∞` when one exists
/// with nothing open (bond mode with a vertex touching both sides).
pub fn crossing_threshold(
    config: &PointConfiguration,
    graph: &ProximityGraph,
    mode: MarkMode,
    uniforms: &[f64],
    delta: f64,
) -> Result<f64, PercolationError> {
    let n = graph.vertex_count;
    let expected = match mode {
        MarkMode::Site => n,
        MarkMode::Bond => graph.edge_count(),
    };
    if uniforms.len() != expected {
        return Err(PercolationError::SizeMismatch {
            expected,
            got: uniforms.len(),
            mode,
        });
    }
    let mut flags = side_flags(config, delta);
    let mut uf = UnionFind::new(n);
    let mut order: Vec<u32> = (0..expected as u32).collect();
    order.sort_by(|&a, &b| uniforms[a as usize].total_cmp(&uniforms[b as usize]));

    let merge = |uf: &mut UnionFind, flags: &mut [u8], a: u32, b: u32| -> bool {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            return flags[ra as usize] == LEFT | RIGHT;
        }
        let f = flags[ra as usize] | flags[rb as usize];
        let root = uf.union(ra, rb).expect("distinct roots");
        flags[root as usize] = f;
        f == LEFT | RIGHT
    };

    match mode {
        MarkMode::Site => {
            let mut active = vec![false; n];
            for &v in &order {
                active[v as usize] = true;
                if flags[v as usize] == LEFT | RIGHT {
                    return Ok(uniforms[v as usize]);
                }
                let mut crossed = false;
                for &w in &graph.adjacency[v as usize] {
                    if active[w as usize] && merge(&mut uf, &mut flags, v, w) {
                        crossed = true;
                    }
                }
                if crossed {
                    return Ok(uniforms[v as usize]);
                }
            }
        }
        MarkMode::Bond => {
            if flags.iter().any(|&f| f == LEFT | RIGHT) {
                return Ok(f64::NEG_INFINITY);
            }
            for &e in &order {
                let (a, b) = graph.edges[e as usize];
                if merge(&mut uf, &mut flags, a, b) {
                    return Ok(uniforms[e as usize]);
                }
            }
        }
    }
    Ok(f64::INFINITY)
}

/// Everything that defines an ensemble of independent replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub window: Window,
    pub intensity: f64,
    pub kind: GraphKind,
    pub mode: MarkMode,
    pub master_seed: u64,
}

impl Ensemble {
    pub fn delta(&self) -> f64 {
        default_delta(self.intensity)
    }

    pub fn sample(&self, replica: u64) -> Result<PointConfiguration, PercolationError> {
        Ok(sample_poisson(
            self.window,
            self.intensity,
            seed::derive_seed(self.master_seed, "sample", replica),
        )?)
    }

    pub fn mark_seed(&self, replica: u64) -> u64 {
        seed::derive_seed(self.master_seed, "marks", replica)
    }

    /// Coupled uniforms for one replica's sites or bonds.
    pub fn uniforms(&self, config: &PointConfiguration, graph: &ProximityGraph, replica: u64) -> Vec<f64> {
        let s = self.mark_seed(replica);
        match self.mode {
            MarkMode::Site => config.points.iter().map(|&p| site_uniform(s, p)).collect(),
            MarkMode::Bond => graph.edges.iter().map(|&(a, b)| bond_uniform(s, a, b)).collect(),
        }
    }

    pub fn replica_threshold(&self, replica: u64) -> Result<f64, PercolationError> {
        let config = self.sample(replica)?;
        let graph = graphs::build(&config, self.kind)?;
        let uniforms = self.uniforms(&config, &graph, replica);
        crossing_threshold(&config, &graph, self.mode, &uniforms, self.delta())
    }

    /// Crossing indicator of one replica at `p`, computed by marking and
    /// clustering directly (no threshold shortcut).
    pub fn replica_crosses_at(&self, replica: u64, p: f64) -> Result<bool, PercolationError> {
        let config = self.sample(replica)?;
        let graph = graphs::build(&config, self.kind)?;
        let uniforms = self.uniforms(&config, &graph, replica);
        let marks = MarkedConfiguration {
            mode: self.mode,
            p,
            seed: self.mark_seed(replica),
            marks: uniforms.iter().map(|&u| u < p).collect(),
            uniforms,
        };
        let labeling = open_clusters(&graph, &marks)?;
        Ok(crossing(&config, &labeling, self.delta()))
    }

    /// Crossing thresholds of replicas `range`, in replica order.
    pub fn thresholds(&self, range: Range<u64>) -> Result<Vec<f64>, PercolationError> {
        range
            .into_par_iter()
            .map(|i| self.replica_threshold(i))
            .collect()
    }
}

/// Crossing-probability estimates over a grid of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub p_grid: Vec<f64>,
    pub crossings: Vec<u64>,
    pub crossing_prob: Vec<f64>,
    pub std_err: Vec<f64>,
    pub replicas: u64,
    pub window: Window,
    pub graph_kind: GraphKind,
    pub mode: MarkMode,
}

impl SweepResult {
    pub fn from_counts(ensemble: &Ensemble, p_grid: Vec<f64>, crossings: Vec<u64>, replicas: u64) -> Self {
        let n = replicas.max(1) as f64;
        let crossing_prob: Vec<f64> = crossings.iter().map(|&c| c as f64 / n).collect();
        let std_err = crossing_prob.iter().map(|&q| (q * (1.0 - q) / n).sqrt()).collect();
        Self {
            p_grid,
            crossings,
            crossing_prob,
            std_err,
            replicas,
            window: ensemble.window,
            graph_kind: ensemble.kind,
            mode: ensemble.mode,
        }
    }

    pub fn from_thresholds(ensemble: &Ensemble, p_grid: Vec<f64>, thresholds: &[f64]) -> Self {
        let crossings = p_grid
            .iter()
            .map(|&p| thresholds.iter().filter(|&&t| t < p).count() as u64)
            .collect();
        Self::from_counts(ensemble, p_grid, crossings, thresholds.len() as u64)
    }

    /// Pools two sweeps over the same grid and ensemble.
    pub fn merge(&self, other: &SweepResult) -> Option<SweepResult> {
        if self.p_grid != other.p_grid
            || self.window != other.window
            || self.graph_kind != other.graph_kind
            || self.mode != other.mode
        {
            return None;
        }
        let counts = self.crossings.iter().zip(&other.crossings).map(|(a, b)| a + b).collect();
        let ensemble = Ensemble {
            window: self.window,
            intensity: 1.0,
            kind: self.graph_kind,
            mode: self.mode,
            master_seed: 0,
        };
        Some(Self::from_counts(
            &ensemble,
            self.p_grid.clone(),
            counts,
            self.replicas + other.replicas,
        ))
    }
}

fn check_grid(p_grid: &[f64]) -> Result<(), PercolationError> {
    for (i, &p) in p_grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(PercolationError::Domain { what: "p", value: p });
        }
        if i > 0 && p < p_grid[i - 1] {
            return Err(PercolationError::Domain {
                what: "p_grid (must be ascending)",
                value: p,
            });
        }
    }
    Ok(())
}

/// Sweep over replicas `range` with the same coupled samples at every `p`.
pub fn sweep_range(
    ensemble: &Ensemble,
    p_grid: &[f64],
    range: Range<u64>,
) -> Result<SweepResult, PercolationError> {
    check_grid(p_grid)?;
    let thresholds = ensemble.thresholds(range)?;
    Ok(SweepResult::from_thresholds(ensemble, p_grid.to_vec(), &thresholds))
}

pub fn sweep(ensemble: &Ensemble, p_grid: &[f64], replicas: u64) -> Result<SweepResult, PercolationError> {
    if replicas == 0 {
        return Err(PercolationError::Domain {
            what: "replicas",
            value: 0.0,
        });
    }
    sweep_range(ensemble, p_grid, 0..replicas)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub target: f64,
    pub tolerance: f64,
    pub initial_replicas: u64,
    pub max_replicas: u64,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            target: 0.5,
            tolerance: 0.01,
            initial_replicas: 128,
            max_replicas: 8192,
            bootstrap_resamples: 2000,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mode: MarkMode,
    pub kind: GraphKind,
    pub window: Window,
    pub replicas: u64,
    pub seed: u64,
}

impl PcEstimate {
    pub fn ci_width(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }
}

/// Bisection for the `p` where the empirical crossing probability reaches `target`.
///
/// `sorted` must be ascending; the crossing probability at `p` is the fraction
/// of thresholds strictly below `p`.
pub fn bisect_crossing(sorted: &[f64], target: f64) -> f64 {
    let n = sorted.len().max(1) as f64;
    let prob = |p: f64| sorted.partition_point(|&t| t < p) as f64 / n;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if prob(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Estimates the `p` at which the crossing probability equals `options.target`,
/// with a percentile-bootstrap interval over replicas. The replica count is
/// doubled until the interval is no wider than `2·tolerance`.
pub fn estimate_pc(ensemble: &Ensemble, options: &EstimateOptions) -> Result<PcEstimate, PercolationError> {
    if !(options.tolerance > 0.0) {
        return Err(PercolationError::Domain {
            what: "tolerance",
            value: options.tolerance,
        });
    }
    if !(options.target > 0.0 && options.target < 1.0) {
        return Err(PercolationError::Domain {
            what: "target",
            value: options.target,
        });
    }
    let mut thresholds: Vec<f64> = Vec::new();
    let mut n = options.initial_replicas.max(8);
    let mut round = 0u64;
    loop {
        let have = thresholds.len() as u64;
        thresholds.extend(ensemble.thresholds(have..n)?);
        let mut sorted = thresholds.clone();
        sorted.sort_by(f64::total_cmp);
        let p_hat = bisect_crossing(&sorted, options.target);

        let mut rng = seed::stream(ensemble.master_seed, "bootstrap", round);
        let mut boots: Vec<f64> = (0..options.bootstrap_resamples.max(1))
            .map(|_| {
                let mut resample: Vec<f64> = (0..sorted.len())
                    .map(|_| sorted[rng.random_range(0..sorted.len())])
                    .collect();
                resample.sort_by(f64::total_cmp);
                bisect_crossing(&resample, options.target)
            })
            .collect();
        boots.sort_by(f64::total_cmp);
        let tail = 0.5 * (1.0 - options.confidence);
        let pick = |q: f64| boots[((q * (boots.len() - 1) as f64).round() as usize).min(boots.len() - 1)];
        let (ci_lo, ci_hi) = (pick(tail), pick(1.0 - tail));
        let width = ci_hi - ci_lo;
        if width <= 2.0 * options.tolerance {
            return Ok(PcEstimate {
                p_hat,
                ci_lo,
                ci_hi,
                mode: ensemble.mode,
                kind: ensemble.kind,
                window: ensemble.window,
                replicas: n,
                seed: ensemble.master_seed,
            });
        }
        if n >= options.max_replicas {
            return Err(PercolationError::BudgetExhausted {
                width,
                target: 2.0 * options.tolerance,
                replicas: n as usize,
            });
        }
        n = (2 * n).min(options.max_replicas);
        round += 1;
    }
}

/// Bounds on the site threshold implied by a bond threshold on a graph of
/// maximum degree 6: `[pc_bond, 1 − (1 − pc_bond)⁶]`.
pub fn degree_relation(pc_bond: f64) -> Result<(f64, f64), PercolationError> {
    if !(0.2..=1.0).contains(&pc_bond) {
        return Err(PercolationError::Domain {
            what: "pc_bond",
            value: pc_bond,
        });
    }
    Ok((pc_bond, 1.0 - (1.0 - pc_bond).powi(6)))
}
