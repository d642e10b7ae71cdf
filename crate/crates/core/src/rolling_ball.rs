//! Monte Carlo side of the rolling-ball renormalization.
//!
//! Everything is evaluated in a local frame where `S1 = [0,R]²`,
//! `S2 = [R,2R]×[0,R]`, `R = 2r+2s`, and the capsule `C1 ∪ L ∪ C2` is the set of
//! points within `r` of the segment joining the square centres. A region placed
//! anywhere in the plane maps its two squares onto this frame by a rotation of
//! a multiple of 90° and a translation.
//!
//! The rolling disk `D_v` of a capsule point `v` is the radius-`r` disk centred
//! on the axis, on the `C2` side, at distance `r` from `v` (so `v` sits on its
//! `C1`-side boundary). The centre is clamped at `c2`, which only happens for
//! points already in `C2`. Since the centre stays on the axis segment,
//! `D_v ⊆ C1 ∪ L ∪ C2`, and `φ(v) = x(centre of D_v)` strictly increases from
//! `v` to any `u ∈ D_v`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundError};
use crate::geometry::{Disk, Point};
use crate::graphs::{self, GraphError, GraphKind, ProximityGraph};
use crate::point_process::{sample_poisson, MarkMode, MarkedConfiguration, PointConfiguration, PointProcessError, Window};
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RollingBallError {
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("window {have_w} x {have_h} does not cover a {need_w} x {need_h} block grid")]
    InsufficientCoverage {
        need_w: f64,
        need_h: f64,
        have_w: f64,
        have_h: f64,
    },
    #[error("squares {a:?} and {b:?} are not lattice neighbours")]
    NotAdjacent { a: (usize, usize), b: (usize, usize) },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    PointProcess(#[from] PointProcessError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

fn positive(name: &'static str, value: f64) -> Result<(), RollingBallError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(RollingBallError::Parameter { name, value })
    }
}

/// Direction from the first square to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    East,
    West,
    North,
    South,
}

impl Orientation {
    pub fn between(a: (usize, usize), b: (usize, usize)) -> Option<Self> {
        let (dx, dy) = (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        match (dx, dy) {
            (1, 0) => Some(Self::East),
            (-1, 0) => Some(Self::West),
            (0, 1) => Some(Self::North),
            (0, -1) => Some(Self::South),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSquareRegion {
    pub r: f64,
    pub s: f64,
    /// Square side `R = 2r + 2s`.
    pub side: f64,
    pub c1: Point,
    pub c2: Point,
    /// World position of the lower-left corner of `S1`.
    pub anchor: Point,
    pub orientation: Orientation,
}

impl TwoSquareRegion {
    /// The canonical region with `S1 = [0,R]²` and `S2` to its east.
    pub fn new(r: f64, s: f64) -> Result<Self, RollingBallError> {
        Self::placed(r, s, Point::new(0.0, 0.0), Orientation::East)
    }

    pub fn placed(r: f64, s: f64, anchor: Point, orientation: Orientation) -> Result<Self, RollingBallError> {
        positive("r", r)?;
        positive("s", s)?;
        let side = 2.0 * r + 2.0 * s;
        Ok(Self {
            r,
            s,
            side,
            c1: Point::new(side / 2.0, side / 2.0),
            c2: Point::new(1.5 * side, side / 2.0),
            anchor,
            orientation,
        })
    }

    /// Local window `S1 ∪ S2 = [0,2R]×[0,R]`.
    pub fn window(&self) -> Window {
        Window::new(0.0, 0.0, 2.0 * self.side, self.side).expect("positive side")
    }

    pub fn to_local(&self, p: Point) -> Point {
        let (u, w) = (p.x - self.anchor.x, p.y - self.anchor.y);
        let rr = self.side;
        match self.orientation {
            Orientation::East => Point::new(u, w),
            Orientation::West => Point::new(rr - u, rr - w),
            Orientation::North => Point::new(w, rr - u),
            Orientation::South => Point::new(rr - w, u),
        }
    }

    /// Points whose local image lies in `S1 ∪ S2`, in local coordinates.
    pub fn localize<'a, I: IntoIterator<Item = &'a Point>>(&self, points: I) -> PointConfiguration {
        let slack = 1e-9 * self.side;
        let (w, h) = (2.0 * self.side, self.side);
        let local: Vec<Point> = points
            .into_iter()
            .map(|&p| self.to_local(p))
            .filter(|q| q.x >= -slack && q.x <= w + slack && q.y >= -slack && q.y <= h + slack)
            .collect();
        let window = Window::new(-slack, -slack, w + slack, h + slack).expect("positive side");
        PointConfiguration::new(window, local, 0).expect("rotated distinct points stay distinct")
    }

    pub fn in_c1(&self, p: Point) -> bool {
        p.dist2(self.c1) < self.r * self.r
    }

    pub fn in_c2(&self, p: Point) -> bool {
        p.dist2(self.c2) < self.r * self.r
    }

    /// The band `L`: between the two centre abscissae, within `r` of the axis.
    pub fn in_band(&self, p: Point) -> bool {
        p.x >= self.c1.x && p.x <= self.c2.x && (p.y - self.c1.y).abs() < self.r
    }

    pub fn in_capsule(&self, p: Point) -> bool {
        self.in_c1(p) || self.in_band(p) || self.in_c2(p)
    }

    /// Abscissa of the centre of `D_v`, or `None` outside the capsule.
    pub fn potential(&self, v: Point) -> Option<f64> {
        if !self.in_capsule(v) {
            return None;
        }
        let dy = v.y - self.c1.y;
        let reach = (self.r * self.r - dy * dy).max(0.0).sqrt();
        Some((v.x + reach).clamp(self.c1.x, self.c2.x))
    }

    pub fn rolling_disk(&self, v: Point) -> Option<Disk> {
        let cx = self.potential(v)?;
        Some(Disk::new(Point::new(cx, self.c1.y), self.r).expect("positive radius"))
    }

    /// The RNG lune of `{u, v}` fits in `S1 ∪ S2`, checked through the disk of
    /// radius `|uv|·√3/2` about the midpoint, which contains it.
    pub fn edge_certifiable(&self, u: Point, v: Point) -> bool {
        let m = u.midpoint(v);
        let rho = u.dist(v) * 3f64.sqrt() / 2.0;
        m.x - rho >= 0.0 && m.x + rho <= 2.0 * self.side && m.y - rho >= 0.0 && m.y + rho <= self.side
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountEvents {
    /// `Φ(C1) ≥ 1`.
    pub f1: bool,
    /// `Φ(C2) ≥ 1`.
    pub f2: bool,
    /// `Φ(C1 ∪ L ∪ C2) ≤ m`.
    pub a_m: bool,
}

/// A region together with the RNG of its local configuration.
#[derive(Debug, Clone)]
pub struct RegionSample {
    pub region: TwoSquareRegion,
    pub config: PointConfiguration,
    pub rng: ProximityGraph,
}

impl RegionSample {
    /// `config` is in world coordinates; points outside the two squares are dropped.
    pub fn new(region: TwoSquareRegion, config: &PointConfiguration) -> Result<Self, RollingBallError> {
        Self::from_points(region, &config.points)
    }

    pub fn from_points(region: TwoSquareRegion, points: &[Point]) -> Result<Self, RollingBallError> {
        let config = region.localize(points);
        let rng = graphs::build(&config, GraphKind::Rng)?;
        Ok(Self { region, config, rng })
    }

    /// `u` advances the rolling ball from `v`: an RNG neighbour, `d(u,v) ≤ s`, `u ∈ D_v`.
    fn advances(&self, v: u32, u: u32, disk: &Disk) -> bool {
        let (pv, pu) = (self.config.points[v as usize], self.config.points[u as usize]);
        pu.dist2(pv) <= self.region.s * self.region.s && disk.contains(pu)
    }

    fn requires_step(&self, p: Point) -> bool {
        self.region.in_c1(p) || self.region.in_band(p)
    }

    /// Vertices of `C1 ∪ L` with no advancing RNG neighbour.
    pub fn e_failures(&self) -> Vec<u32> {
        (0..self.config.len() as u32)
            .filter(|&v| {
                let p = self.config.points[v as usize];
                if !self.requires_step(p) {
                    return false;
                }
                let disk = self.region.rolling_disk(p).expect("capsule point");
                !self.rng.adjacency[v as usize].iter().any(|&u| self.advances(v, u, &disk))
            })
            .collect()
    }

    /// Every point of `C1 ∪ L` can advance the rolling ball.
    pub fn event_e(&self) -> bool {
        self.e_failures().is_empty()
    }

    pub fn count_events(&self, m: u64) -> CountEvents {
        let pts = &self.config.points;
        CountEvents {
            f1: pts.iter().any(|&p| self.region.in_c1(p)),
            f2: pts.iter().any(|&p| self.region.in_c2(p)),
            a_m: (pts.iter().filter(|&&p| self.region.in_capsule(p)).count() as u64) <= m,
        }
    }

    /// Every vertex of `C1` reaches a vertex of `C2` along certifiable RNG edges.
    pub fn good_event(&self) -> bool {
        let pts = &self.config.points;
        let n = pts.len();
        let mut seen = vec![false; n];
        let mut queue: VecDeque<u32> = (0..n as u32).filter(|&v| self.region.in_c2(pts[v as usize])).collect();
        for &v in &queue {
            seen[v as usize] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &u in &self.rng.adjacency[v as usize] {
                if !seen[u as usize] && self.region.edge_certifiable(pts[v as usize], pts[u as usize]) {
                    seen[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }
        (0..n).all(|v| seen[v] || !self.region.in_c1(pts[v]))
    }

    /// Rolling-ball chain from `start` into `C2`, taking the step with the
    /// largest potential each time. `None` if the chain gets stuck.
    pub fn greedy_path(&self, start: u32) -> Option<Vec<u32>> {
        let pts = &self.config.points;
        let mut path = vec![start];
        let mut v = start;
        loop {
            let p = pts[v as usize];
            if self.region.in_c2(p) {
                return Some(path);
            }
            if !self.requires_step(p) || path.len() > pts.len() {
                return None;
            }
            let disk = self.region.rolling_disk(p)?;
            v = self.rng.adjacency[v as usize]
                .iter()
                .copied()
                .filter(|&u| self.advances(v, u, &disk))
                .max_by(|&a, &b| {
                    let pa = self.region.potential(pts[a as usize]).unwrap_or(f64::NEG_INFINITY);
                    let pb = self.region.potential(pts[b as usize]).unwrap_or(f64::NEG_INFINITY);
                    pa.total_cmp(&pb).then(b.cmp(&a))
                })?;
            path.push(v);
        }
    }

    /// Greedy paths for every vertex of `C1`.
    pub fn c1_paths(&self) -> Option<Vec<Vec<u32>>> {
        (0..self.config.len() as u32)
            .filter(|&v| self.region.in_c1(self.config.points[v as usize]))
            .map(|v| self.greedy_path(v))
            .collect()
    }

    /// The path uses RNG edges that are certifiable and end in `C2`.
    pub fn path_is_valid(&self, path: &[u32]) -> bool {
        let pts = &self.config.points;
        let Some(&last) = path.last() else {
            return false;
        };
        self.region.in_c2(pts[last as usize])
            && path.windows(2).all(|w| {
                self.rng.has_edge(w[0], w[1])
                    && self.region.edge_certifiable(pts[w[0] as usize], pts[w[1] as usize])
            })
    }
}

pub fn test_event_e(region: &TwoSquareRegion, config: &PointConfiguration) -> Result<bool, RollingBallError> {
    Ok(RegionSample::new(*region, config)?.event_e())
}

pub fn test_events_f_a(region: &TwoSquareRegion, config: &PointConfiguration, m: u64) -> Result<CountEvents, RollingBallError> {
    Ok(RegionSample::new(*region, config)?.count_events(m))
}

pub fn test_good_event(region: &TwoSquareRegion, config: &PointConfiguration) -> Result<bool, RollingBallError> {
    Ok(RegionSample::new(*region, config)?.good_event())
}

/// Unit-intensity Poisson sample on the canonical region's window.
pub fn sample_region(region: &TwoSquareRegion, master: u64, replica: u64) -> Result<PointConfiguration, RollingBallError> {
    let seed = seed::derive_seed(master, "rolling-ball", replica);
    Ok(sample_poisson(region.window(), 1.0, seed)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReplicaOutcome {
    pub points: usize,
    pub e: bool,
    pub counts: CountEvents,
    pub good: bool,
    /// `E ∩ F ∩ A_m` held but the good event did not.
    pub containment_violation: bool,
    /// `E ∩ F ∩ A_m` held and every `C1` vertex got a valid constructed path.
    pub paths_built: bool,
}

pub fn replica_outcome(region: &TwoSquareRegion, m: u64, master: u64, replica: u64) -> Result<ReplicaOutcome, RollingBallError> {
    let config = sample_region(region, master, replica)?;
    let sample = RegionSample::new(*region, &config)?;
    let e = sample.event_e();
    let counts = sample.count_events(m);
    let good = sample.good_event();
    let all = e && counts.f1 && counts.f2 && counts.a_m;
    let paths_built = all
        && sample
            .c1_paths()
            .is_some_and(|ps| ps.iter().all(|p| sample.path_is_valid(p)));
    Ok(ReplicaOutcome {
        points: sample.config.len(),
        e,
        counts,
        good,
        containment_violation: all && !good,
        paths_built,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub count: u64,
    pub p: f64,
    pub std_err: f64,
}

impl Frequency {
    pub fn new(count: u64, n: u64) -> Self {
        let p = count as f64 / n as f64;
        Self {
            count,
            p,
            std_err: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    /// `p ≤ bound + k·σ`, with `σ` floored at one event's worth so zero counts
    /// are not treated as exact.
    pub fn at_most(&self, bound: f64, k: f64, n: u64) -> bool {
        self.p <= bound + k * self.std_err.max(1.0 / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventStatistics {
    pub r: f64,
    pub s: f64,
    pub m: u64,
    pub replicas: u64,
    pub e_fail: Frequency,
    pub f_fail: Frequency,
    pub f2_fail: Frequency,
    pub am_fail: Frequency,
    pub good: Frequency,
    pub containment_violations: u64,
    /// Replicas where `E ∩ F ∩ A_m` held.
    pub all_events: u64,
    pub paths_built: u64,
    pub analytic_e: f64,
    pub analytic_f: f64,
    pub analytic_am: f64,
}

/// Runs `replicas` independent region samples (in parallel, seed-deterministic).
pub fn event_statistics(
    r: f64,
    s: f64,
    m: u64,
    replicas: u64,
    master: u64,
    quadrature_tol: f64,
) -> Result<EventStatistics, RollingBallError> {
    let region = TwoSquareRegion::new(r, s)?;
    if replicas == 0 {
        return Err(RollingBallError::Parameter { name: "replicas", value: 0.0 });
    }
    let outcomes: Vec<ReplicaOutcome> = (0..replicas)
        .into_par_iter()
        .map(|i| replica_outcome(&region, m, master, i))
        .collect::<Result<_, _>>()?;
    let count = |f: fn(&ReplicaOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let all_events = count(|o| o.e && o.counts.f1 && o.counts.f2 && o.counts.a_m);
    Ok(EventStatistics {
        r,
        s,
        m,
        replicas,
        e_fail: Frequency::new(count(|o| !o.e), replicas),
        f_fail: Frequency::new(count(|o| !o.counts.f1), replicas),
        f2_fail: Frequency::new(count(|o| !o.counts.f2), replicas),
        am_fail: Frequency::new(count(|o| !o.counts.a_m), replicas),
        good: Frequency::new(count(|o| o.good), replicas),
        containment_violations: count(|o| o.containment_violation),
        all_events,
        paths_built: count(|o| o.paths_built),
        analytic_e: bounds::e_bar_bound(r, s, quadrature_tol)?.log_value.exp(),
        analytic_f: bounds::f_bar_bound(r)?.exp(),
        analytic_am: bounds::a_m_tail(r, s, m)?.log_exact.exp(),
    })
}

/// Probability that a typical point `v` has no RNG neighbour `u` with
/// `|uv| ≤ s` inside its rolling disk, by direct simulation of a unit-intensity
/// process around `v`.
pub fn simulate_p_rn(r: f64, s: f64, replicas: u64, master: u64) -> Result<Frequency, RollingBallError> {
    positive("r", r)?;
    positive("s", s)?;
    let window = Window::new(-s, -s, s, s)?;
    let centre = Point::new(r, 0.0);
    let failures: u64 = (0..replicas)
        .into_par_iter()
        .map(|i| -> Result<u64, RollingBallError> {
            let cfg = sample_poisson(window, 1.0, seed::derive_seed(master, "p-rn", i))?;
            let near: Vec<Point> = cfg.points.into_iter().filter(|p| p.x * p.x + p.y * p.y <= s * s).collect();
            let ok = near.iter().any(|&u| {
                let d2 = u.x * u.x + u.y * u.y;
                u.dist2(centre) < r * r
                    && !near
                        .iter()
                        .any(|&w| w != u && w.x * w.x + w.y * w.y < d2 && w.dist2(u) < d2)
            });
            Ok(u64::from(!ok))
        })
        .sum::<Result<u64, _>>()?;
    Ok(Frequency::new(failures, replicas))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeEdge {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

/// Coarse ℤ² bond process: squares of side `R`, an edge open iff the good
/// events hold in both directions. Squares with empty central disks make their
/// events vacuously true.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormalizedLattice {
    pub nx: usize,
    pub ny: usize,
    pub r: f64,
    pub s: f64,
    pub side: f64,
    pub origin: Point,
    pub edges: Vec<LatticeEdge>,
    pub edge_open: Vec<bool>,
    pub source_seed: u64,
}

fn lattice_edges(nx: usize, ny: usize) -> Vec<LatticeEdge> {
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                out.push(LatticeEdge { a: (i, j), b: (i + 1, j) });
            }
            if j + 1 < ny {
                out.push(LatticeEdge { a: (i, j), b: (i, j + 1) });
            }
        }
    }
    out
}

fn square_of(p: Point, origin: Point, side: f64, nx: usize, ny: usize) -> Option<(usize, usize)> {
    let i = ((p.x - origin.x) / side).floor();
    let j = ((p.y - origin.y) / side).floor();
    (i >= 0.0 && j >= 0.0 && (i as usize) < nx && (j as usize) < ny).then(|| (i as usize, j as usize))
}

#[derive(Debug, Clone, Copy)]
struct Blocks {
    r: f64,
    s: f64,
    side: f64,
    origin: Point,
}

impl Blocks {
    fn corner(&self, sq: (usize, usize)) -> Point {
        Point::new(
            self.origin.x + sq.0 as f64 * self.side,
            self.origin.y + sq.1 as f64 * self.side,
        )
    }

    fn good(&self, from: (usize, usize), to: (usize, usize), points: &[Point]) -> Result<bool, RollingBallError> {
        let orientation = Orientation::between(from, to).ok_or(RollingBallError::NotAdjacent { a: from, b: to })?;
        let region = TwoSquareRegion::placed(self.r, self.s, self.corner(from), orientation)?;
        Ok(RegionSample::from_points(region, points)?.good_event())
    }

    fn edge_state(&self, e: LatticeEdge, points: &[Point]) -> Result<bool, RollingBallError> {
        Ok(self.good(e.a, e.b, points)? && self.good(e.b, e.a, points)?)
    }
}

impl RenormalizedLattice {
    fn blocks(&self) -> Blocks {
        Blocks {
            r: self.r,
            s: self.s,
            side: self.side,
            origin: self.origin,
        }
    }

    pub fn vertex(&self, sq: (usize, usize)) -> u32 {
        (sq.1 * self.nx + sq.0) as u32
    }

    pub fn open_count(&self) -> usize {
        self.edge_open.iter().filter(|&&o| o).count()
    }

    /// The full grid graph with one vertex per square.
    pub fn grid_graph(&self) -> ProximityGraph {
        let edges = self.edges.iter().map(|e| (self.vertex(e.a), self.vertex(e.b)));
        ProximityGraph::from_edges(GraphKind::Lattice, self.nx * self.ny, edges.collect::<Vec<_>>())
            .expect("grid edges are in range")
    }

    /// Bond marks aligned with [`grid_graph`](Self::grid_graph)'s edge list.
    pub fn bond_marks(&self) -> MarkedConfiguration {
        let graph = self.grid_graph();
        let state: std::collections::HashMap<(u32, u32), bool> = self
            .edges
            .iter()
            .zip(&self.edge_open)
            .map(|(e, &o)| {
                let (a, b) = (self.vertex(e.a), self.vertex(e.b));
                ((a.min(b), a.max(b)), o)
            })
            .collect();
        MarkedConfiguration::from_marks(MarkMode::Bond, graph.edges.iter().map(|k| state[k]).collect())
    }

    /// Recomputes one edge from a fresh copy of only its two squares' points.
    pub fn edge_state_isolated(&self, config: &PointConfiguration, edge: LatticeEdge) -> Result<bool, RollingBallError> {
        let blocks = self.blocks();
        let copy: Vec<Point> = config
            .points
            .iter()
            .copied()
            .filter(|&p| {
                let sq = square_of(p, self.origin, self.side, self.nx, self.ny);
                sq == Some(edge.a) || sq == Some(edge.b)
            })
            .collect();
        blocks.edge_state(edge, &copy)
    }
}

/// Renormalized lattice over an `nx × ny` block grid anchored at the lower-left
/// corner of `config.window`.
pub fn build_renormalized_lattice(
    config: &PointConfiguration,
    r: f64,
    s: f64,
    (nx, ny): (usize, usize),
) -> Result<RenormalizedLattice, RollingBallError> {
    positive("r", r)?;
    positive("s", s)?;
    if nx == 0 || ny == 0 {
        return Err(RollingBallError::Parameter { name: "grid", value: 0.0 });
    }
    let side = 2.0 * r + 2.0 * s;
    let (need_w, need_h) = (nx as f64 * side, ny as f64 * side);
    let w = &config.window;
    let tol = 1e-9 * side;
    if w.width() + tol < need_w || w.height() + tol < need_h {
        return Err(RollingBallError::InsufficientCoverage {
            need_w,
            need_h,
            have_w: w.width(),
            have_h: w.height(),
        });
    }
    let origin = Point::new(w.x0, w.y0);
    let blocks = Blocks { r, s, side, origin };
    let mut buckets: Vec<Vec<Point>> = vec![Vec::new(); nx * ny];
    for &p in &config.points {
        if let Some((i, j)) = square_of(p, origin, side, nx, ny) {
            buckets[j * nx + i].push(p);
        }
    }
    let edges = lattice_edges(nx, ny);
    let edge_open = edges
        .par_iter()
        .map(|e| {
            let mut pts = buckets[e.a.1 * nx + e.a.0].clone();
            pts.extend_from_slice(&buckets[e.b.1 * nx + e.b.0]);
            blocks.edge_state(*e, &pts)
        })
        .collect::<Result<Vec<bool>, _>>()?;
    Ok(RenormalizedLattice {
        nx,
        ny,
        r,
        s,
        side,
        origin,
        edges,
        edge_open,
        source_seed: config.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCorrelation {
    pub replicas: u64,
    pub p_first: f64,
    pub p_second: f64,
    /// Pearson correlation; 0 when either state never varies.
    pub rho: f64,
    pub degenerate: bool,
}

/// Correlation of the states of two lattice edges over independent big samples
/// of a unit-intensity process on an `nx × ny` block grid.
pub fn edge_correlation(
    r: f64,
    s: f64,
    grid: (usize, usize),
    first: LatticeEdge,
    second: LatticeEdge,
    replicas: u64,
    master: u64,
) -> Result<EdgeCorrelation, RollingBallError> {
    let side = 2.0 * r + 2.0 * s;
    let window = Window::new(0.0, 0.0, grid.0 as f64 * side, grid.1 as f64 * side)?;
    let blocks = Blocks {
        r,
        s,
        side,
        origin: Point::new(0.0, 0.0),
    };
    let pairs: Vec<(bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool), RollingBallError> {
            let cfg = sample_poisson(window, 1.0, seed::derive_seed(master, "lattice", i))?;
            let states = [first, second].map(|e| {
                let pts: Vec<Point> = cfg
                    .points
                    .iter()
                    .copied()
                    .filter(|&p| {
                        let sq = square_of(p, blocks.origin, side, grid.0, grid.1);
                        sq == Some(e.a) || sq == Some(e.b)
                    })
                    .collect();
                blocks.edge_state(e, &pts)
            });
            let [a, b] = states;
            Ok((a?, b?))
        })
        .collect::<Result<_, _>>()?;
    let n = replicas as f64;
    let pa = pairs.iter().filter(|p| p.0).count() as f64 / n;
    let pb = pairs.iter().filter(|p| p.1).count() as f64 / n;
    let pab = pairs.iter().filter(|p| p.0 && p.1).count() as f64 / n;
    let var = pa * (1.0 - pa) * pb * (1.0 - pb);
    let degenerate = var == 0.0;
    Ok(EdgeCorrelation {
        replicas,
        p_first: pa,
        p_second: pb,
        rho: if degenerate { 0.0 } else { (pab - pa * pb) / var.sqrt() },
        degenerate,
    })
}

#[cfg(test)]
mod tests;
