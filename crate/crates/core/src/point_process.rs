//! Homogeneous Poisson sampling on rectangular windows and Bernoulli marks.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundingBox, Point};
use crate::graphs::ProximityGraph;
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointProcessError {
    #[error("degenerate window [{x0}, {x1}] x [{y0}, {y1}]")]
    DegenerateWindow { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("intensity must be positive and finite, got {0}")]
    Intensity(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("point {index} ({x}, {y}) lies outside the window")]
    OutsideWindow { index: usize, x: f64, y: f64 },
    #[error("duplicate point ({x}, {y})")]
    Duplicate { x: f64, y: f64 },
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, PointProcessError> {
        let ok = [x0, y0, x1, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(PointProcessError::DegenerateWindow { x0, y0, x1, y1 });
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// `[0, side]²`.
    pub fn square(side: f64) -> Result<Self, PointProcessError> {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox {
            x0: self.x0,
            y0: self.y0,
            x1: self.x1,
            y1: self.y1,
        }
    }
}

/// A finite planar configuration in canonical `(y, x)` lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub window: Window,
    pub points: Vec<Point>,
    pub seed: u64,
    /// Intensity the sample was drawn with, if it came from [`sample_poisson`].
    pub intensity: Option<f64>,
}

fn canonical_cmp(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))
}

impl PointConfiguration {
    /// Validates the points against the window and sorts them canonically.
    pub fn new(
        window: Window,
        mut points: Vec<Point>,
        seed: u64,
    ) -> Result<Self, PointProcessError> {
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(PointProcessError::NonFinite(i));
            }
            if !window.contains(*p) {
                return Err(PointProcessError::OutsideWindow {
                    index: i,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        points.sort_by(canonical_cmp);
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(PointProcessError::Duplicate {
                x: w[0].x,
                y: w[0].y,
            });
        }
        Ok(Self {
            window,
            points,
            seed,
            intensity: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points falling inside `window` (unchanged seed; canonical order preserved).
    pub fn restrict(&self, window: Window) -> PointConfiguration {
        PointConfiguration {
            window,
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| window.contains(*p))
                .collect(),
            seed: self.seed,
            intensity: self.intensity,
        }
    }
}

/// Poisson process of the given intensity on `window`, deterministic in `seed`.
pub fn sample_poisson(
    window: Window,
    intensity: f64,
    seed: u64,
) -> Result<PointConfiguration, PointProcessError> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(PointProcessError::Intensity(intensity));
    }
    let mut rng = seed::stream(seed, "poisson", 0);
    let mean = intensity * window.area();
    let count = Poisson::new(mean)
        .map_err(|_| PointProcessError::Intensity(intensity))?
        .sample(&mut rng) as usize;
    let (w, h) = (window.width(), window.height());
    let mut points: Vec<Point> = (0..count)
        .map(|_| {
            Point::new(
                window.x0 + w * rng.random::<f64>(),
                window.y0 + h * rng.random::<f64>(),
            )
        })
        .collect();
    points.sort_by(canonical_cmp);
    // coincident draws have probability ~2^-106 per pair; drop rather than fail
    points.dedup();
    Ok(PointConfiguration {
        window,
        points,
        seed,
        intensity: Some(intensity),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkMode {
    Site,
    Bond,
}

impl std::fmt::Display for MarkMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MarkMode::Site => "site",
            MarkMode::Bond => "bond",
        })
    }
}

impl std::str::FromStr for MarkMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "site" => Ok(MarkMode::Site),
            "bond" => Ok(MarkMode::Bond),
            other => Err(format!("unknown mode '{other}' (expected site|bond)")),
        }
    }
}

/// Open/closed marks with the coupled uniforms that produced them.
///
/// Item `i` is open iff `uniforms[i] < p`, so raising `p` only opens items.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedConfiguration {
    pub mode: MarkMode,
    pub p: f64,
    pub seed: u64,
    pub uniforms: Vec<f64>,
    pub marks: Vec<bool>,
}

impl MarkedConfiguration {
    fn from_uniforms(mode: MarkMode, p: f64, seed: u64, uniforms: Vec<f64>) -> Self {
        let marks = uniforms.iter().map(|&u| u < p).collect();
        Self {
            mode,
            p,
            seed,
            uniforms,
            marks,
        }
    }

    /// Same uniforms thresholded at a different `p`.
    pub fn with_p(&self, p: f64) -> Result<Self, PointProcessError> {
        check_probability(p)?;
        Ok(Self::from_uniforms(self.mode, p, self.seed, self.uniforms.clone()))
    }

    /// Mark built from explicit open/closed states (hand-built fixtures).
    pub fn from_marks(mode: MarkMode, marks: Vec<bool>) -> Self {
        let uniforms = marks.iter().map(|&m| if m { 0.0 } else { 1.0 }).collect();
        Self {
            mode,
            p: f64::NAN,
            seed: 0,
            uniforms,
            marks,
        }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn open_count(&self) -> usize {
        self.marks.iter().filter(|&&m| m).count()
    }
}

fn check_probability(p: f64) -> Result<(), PointProcessError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(PointProcessError::Probability(p))
    }
}

/// Uniform attached to a site; depends only on the seed and the site's coordinates.
pub fn site_uniform(seed: u64, p: Point) -> f64 {
    let base = seed::derive_seed(seed, "site-mark", 0);
    let key = seed::splitmix64(p.x.to_bits() ^ seed::splitmix64(p.y.to_bits()));
    seed::unit_from_bits(seed::splitmix64(base ^ key))
}

/// Uniform attached to the bond between canonical vertex indices `i` and `j`.
pub fn bond_uniform(seed: u64, i: u32, j: u32) -> f64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let base = seed::derive_seed(seed, "bond-mark", 0);
    let key = seed::splitmix64(a as u64 ^ seed::splitmix64(b as u64));
    seed::unit_from_bits(seed::splitmix64(base ^ key))
}

pub fn mark_sites(
    config: &PointConfiguration,
    p: f64,
    seed: u64,
) -> Result<MarkedConfiguration, PointProcessError> {
    check_probability(p)?;
    let uniforms = config.points.iter().map(|&q| site_uniform(seed, q)).collect();
    Ok(MarkedConfiguration::from_uniforms(MarkMode::Site, p, seed, uniforms))
}

pub fn mark_bonds(
    graph: &ProximityGraph,
    p: f64,
    seed: u64,
) -> Result<MarkedConfiguration, PointProcessError> {
    check_probability(p)?;
    let uniforms = graph
        .edges
        .iter()
        .map(|&(i, j)| bond_uniform(seed, i, j))
        .collect();
    Ok(MarkedConfiguration::from_uniforms(MarkMode::Bond, p, seed, uniforms))
}

/// Exact ties that violate general position.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GeneralPositionReport {
    pub collinear_triples: Vec<[usize; 3]>,
    pub cocircular_quadruples: Vec<[usize; 4]>,
    pub equal_distance_pairs: Vec<([usize; 2], [usize; 2])>,
}

impl GeneralPositionReport {
    pub fn is_clean(&self) -> bool {
        self.collinear_triples.is_empty()
            && self.cocircular_quadruples.is_empty()
            && self.equal_distance_pairs.is_empty()
    }
}

/// Scans a (small) configuration for exact degeneracies with exact predicates.
///
/// Cost is O(n⁴); meant for hand-built fixtures, not Poisson samples.
pub fn general_position_report(config: &PointConfiguration) -> GeneralPositionReport {
    use robust::{incircle, orient2d, Coord};
    let c = |p: Point| Coord { x: p.x, y: p.y };
    let pts = &config.points;
    let n = pts.len();
    let mut report = GeneralPositionReport::default();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if orient2d(c(pts[i]), c(pts[j]), c(pts[k])) == 0.0 {
                    report.collinear_triples.push([i, j, k]);
                    continue;
                }
                for l in k + 1..n {
                    if incircle(c(pts[i]), c(pts[j]), c(pts[k]), c(pts[l])) == 0.0 {
                        report.cocircular_quadruples.push([i, j, k, l]);
                    }
                }
            }
        }
    }
    let mut dists: Vec<(f64, [usize; 2])> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            dists.push((pts[i].dist2(pts[j]), [i, j]));
        }
    }
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in dists.windows(2) {
        if w[0].0 == w[1].0 {
            report.equal_distance_pairs.push((w[0].1, w[1].1));
        }
    }
    report
}
