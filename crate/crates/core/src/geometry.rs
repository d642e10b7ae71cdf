//! Planar primitives and the closed-form areas used by the rolling-disk bounds.
//!
//! Conventions for the rolling-disk frame: `v` is the base point, `O = v + r·axis`
//! is the center of the radius-`r` disk `D_v` (so `v` lies on its boundary), and a
//! point `u` at distance `alpha` from `v` is described by the angle `theta`
//! measured at `v` from the `v → O` ray.
//!
//! The lune closed form measures `D(u, alpha) \ D_v`. This was settled with the
//! Monte Carlo area oracle: the alternative reading
//! `D(v, alpha) ∩ D(u, alpha) \ D_v` is a strict subset and does not match (see
//! the `lune_region_matches_caption_reading` test). Since the larger region is
//! used, every bound assembled from it stays an upper bound.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use thiserror::Error;

use crate::seed;

/// Slack absorbed when an inverse-trig argument lands just outside `[-1, 1]`.
pub const TRIG_CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn checked(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite { x, y })
        }
    }

    #[inline]
    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    #[inline]
    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    #[inline]
    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(GeometryError::Domain {
                what: "disk radius",
                value: radius,
            });
        }
        Ok(Self { center, radius })
    }

    /// Open-disk membership.
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.center.dist2(p) < self.radius * self.radius
    }

    #[inline]
    pub fn contains_closed(&self, p: Point) -> bool {
        self.center.dist2(p) <= self.radius * self.radius
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox {
            x0: self.center.x - self.radius,
            y0: self.center.y - self.radius,
            x1: self.center.x + self.radius,
            y1: self.center.y + self.radius,
        }
    }
}

/// Axis-aligned rectangle used as a sampling box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// True iff the closed disk lies inside the rectangle.
    pub fn contains_disk(&self, center: Point, radius: f64) -> bool {
        center.x - radius >= self.x0
            && center.x + radius <= self.x1
            && center.y - radius >= self.y0
            && center.y + radius <= self.y1
    }
}

/// The radius-`r` disk `D_v` with `v` on its boundary and center `v + r·axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingDiskFrame {
    pub r: f64,
    pub s: f64,
    pub v: Point,
    axis: (f64, f64),
}

impl RollingDiskFrame {
    pub fn new(r: f64, s: f64, v: Point, axis: (f64, f64)) -> Result<Self, GeometryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::Domain { what: "r", value: r });
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(GeometryError::Domain { what: "s", value: s });
        }
        let norm = axis.0.hypot(axis.1);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(GeometryError::Domain {
                what: "axis length",
                value: norm,
            });
        }
        Ok(Self {
            r,
            s,
            v,
            axis: (axis.0 / norm, axis.1 / norm),
        })
    }

    pub fn axis(&self) -> (f64, f64) {
        self.axis
    }

    pub fn center(&self) -> Point {
        self.v.offset(self.r * self.axis.0, self.r * self.axis.1)
    }

    pub fn disk(&self) -> Disk {
        Disk {
            center: self.center(),
            radius: self.r,
        }
    }

    /// Point at polar position `(alpha, theta)` relative to `v` and the axis.
    pub fn polar(&self, alpha: f64, theta: f64) -> Point {
        let (ax, ay) = self.axis;
        let (c, s) = (theta.cos(), theta.sin());
        // rotate axis by theta (counter-clockwise)
        self.v
            .offset(alpha * (c * ax - s * ay), alpha * (s * ax + c * ay))
    }
}

fn clamp_unit(x: f64, what: &'static str) -> Result<f64, GeometryError> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + TRIG_CLAMP_TOL {
        Ok(x.clamp(-1.0, 1.0))
    } else {
        Err(GeometryError::Domain { what, value: x })
    }
}

fn check_positive(x: f64, what: &'static str) -> Result<(), GeometryError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::Domain { what, value: x })
    }
}

/// `t ∈ [0, 2r]`, snapping values within `TRIG_CLAMP_TOL` relative slack.
fn check_span(t: f64, r: f64, what: &'static str) -> Result<f64, GeometryError> {
    let hi = 2.0 * r;
    if t.is_nan() || t < 0.0 || t > hi * (1.0 + TRIG_CLAMP_TOL) {
        return Err(GeometryError::Domain { what, value: t });
    }
    Ok(t.min(hi))
}

/// Area of `D_v ∩ D(v, t)` where the center of `D_v` is at distance `r` from `v`.
pub fn lens_area_dv(r: f64, t: f64) -> Result<f64, GeometryError> {
    check_positive(r, "r")?;
    let t = check_span(t, r, "t")?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let q = t / (2.0 * r);
    let root = (1.0 - q * q).max(0.0).sqrt();
    let asin_q = clamp_unit(q, "t/2r")?.asin();
    let area = -r * t * root + (2.0 * r * r - t * t) * asin_q + t * t * FRAC_PI_2;
    // clamp rounding noise at t → 0 and t → 2r into the valid range
    Ok(area.clamp(0.0, PI * r.min(t).powi(2)))
}

/// Largest admissible `theta` for `u` at distance `alpha`: `u` inside `D_v`.
pub fn theta_max(alpha: f64, r: f64) -> Result<f64, GeometryError> {
    Ok(clamp_unit(alpha / (2.0 * r), "alpha/2r")?.acos())
}

/// Area of the lune `D(u, alpha) \ D_v` for `u` at polar position `(alpha, theta)`.
///
/// The angle at `O` between `O → v` and `O → u` is evaluated with `atan2`.
/// On the acute branch this is exactly `asin(alpha·sinθ / |uO|)`; the `atan2`
/// form stays correct when that angle is obtuse (`alpha > r` near `theta = 0`),
/// where the plain arcsine picks the wrong branch.
pub fn lune_area(alpha: f64, r: f64, theta: f64) -> Result<f64, GeometryError> {
    check_positive(alpha, "alpha")?;
    check_positive(r, "r")?;
    check_span(alpha, r, "alpha")?;
    let tmax = theta_max(alpha, r)?;
    if theta.is_nan() || theta < -TRIG_CLAMP_TOL || theta > tmax + TRIG_CLAMP_TOL {
        return Err(GeometryError::Domain {
            what: "theta",
            value: theta,
        });
    }
    let theta = theta.clamp(0.0, tmax);
    if theta == 0.0 {
        return Ok(0.0);
    }
    let (sin_t, cos_t) = theta.sin_cos();
    if alpha < r {
        // same expression regrouped into nonnegative terms, free of the
        // O(alpha·r) cancellation when alpha ≪ r
        let denom = r - alpha * cos_t;
        let x = alpha * sin_t / denom;
        let area = alpha * alpha * 0.5 * t_minus_sin(2.0 * theta)
            + alpha.powi(3) * sin_t.powi(3) / denom
            + (r - alpha) * (r + alpha) * x_minus_atan(x);
        return Ok(area.max(0.0));
    }
    let angle_at_center = (alpha * sin_t).atan2(r - alpha * cos_t);
    let area = alpha * alpha * theta + (alpha * alpha - r * r) * angle_at_center + alpha * r * sin_t;
    Ok(area.max(0.0))
}

/// `t − sin t` without cancellation near 0.
fn t_minus_sin(t: f64) -> f64 {
    if t.abs() >= 0.5 {
        return t - t.sin();
    }
    let t2 = t * t;
    let mut term = t * t2 / 6.0;
    let mut sum = term;
    for k in 2..12 {
        term *= -t2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += term;
    }
    sum
}

/// `x − atan x` without cancellation near 0.
fn x_minus_atan(x: f64) -> f64 {
    if x.abs() >= 0.1 {
        return x - x.atan();
    }
    let x2 = x * x;
    let mut pow = x * x2;
    let mut sum = 0.0;
    for k in 1..10 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * pow / (2 * k + 1) as f64;
        pow *= x2;
    }
    sum
}

/// Closed form of the lune area at the split angle `theta = arccos(alpha/2r) − π/3`.
///
/// Agrees with [`lune_area`] whenever the split angle is nonnegative
/// (`alpha ≤ r`). For `alpha > r` the expression is still returned as is and
/// may be negative.
pub fn lune_area_at_split(alpha: f64, r: f64) -> Result<f64, GeometryError> {
    check_positive(alpha, "alpha")?;
    check_positive(r, "r")?;
    let alpha = check_span(alpha, r, "alpha")?;
    let q = alpha / (2.0 * r);
    let asin_q = clamp_unit(q, "alpha/2r")?.asin();
    let root = (1.0 - q * q).max(0.0).sqrt();
    Ok(0.5 * alpha * alpha * (FRAC_PI_3 - 3f64.sqrt() / 2.0) - r * r * asin_q
        + 0.5 * r * alpha * root)
}

/// Split angle `arccos(alpha/2r) − π/3`.
pub fn split_angle(alpha: f64, r: f64) -> Result<f64, GeometryError> {
    Ok(theta_max(alpha, r)? - FRAC_PI_3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl AreaEstimate {
    /// `|value − estimate|` in units of the standard error (∞ if it is 0 and they differ).
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (value - self.estimate).abs();
        if diff == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.std_error
        }
    }
}

/// Hit-or-miss Monte Carlo area of `region` inside `bbox`.
pub fn mc_region_area<F>(region: F, bbox: BoundingBox, n_samples: u64, seed: u64) -> AreaEstimate
where
    F: Fn(Point) -> bool,
{
    assert!(n_samples >= 1, "mc_region_area needs at least one sample");
    let mut rng = seed::stream(seed, "mc-area", 0);
    let (w, h) = (bbox.x1 - bbox.x0, bbox.y1 - bbox.y0);
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let p = Point::new(bbox.x0 + w * rng.random::<f64>(), bbox.y0 + h * rng.random::<f64>());
        if region(p) {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    let frac = hits as f64 / n;
    let area = bbox.area();
    AreaEstimate {
        estimate: area * frac,
        std_error: area * (frac * (1.0 - frac) / n).sqrt(),
    }
}

/// Membership predicates for the regions behind the closed forms, built
/// straight from their set definitions. These are what the Monte Carlo oracle
/// integrates.
pub mod regions {
    use super::*;

    /// Canonical frame: `v` at the origin, axis along `+x`.
    pub fn frame(r: f64) -> RollingDiskFrame {
        RollingDiskFrame::new(r, r, Point::new(0.0, 0.0), (1.0, 0.0)).expect("r > 0")
    }

    /// `D_v ∩ D(v, t)` and a box containing it.
    pub fn lens(r: f64, t: f64) -> (impl Fn(Point) -> bool, BoundingBox) {
        let f = frame(r);
        let dv = f.disk();
        let dt = Disk {
            center: f.v,
            radius: t,
        };
        let bbox = BoundingBox {
            x0: 0.0,
            y0: -t,
            x1: t,
            y1: t,
        };
        (move |p: Point| dv.contains(p) && dt.contains(p), bbox)
    }

    /// `D(u, alpha) \ D_v`: the reading that matches the closed form.
    pub fn lune_outside(alpha: f64, r: f64, theta: f64) -> (impl Fn(Point) -> bool, BoundingBox) {
        let f = frame(r);
        let dv = f.disk();
        let du = Disk {
            center: f.polar(alpha, theta),
            radius: alpha,
        };
        (move |p: Point| du.contains(p) && !dv.contains(p), du.bbox())
    }

    /// `D(v, alpha) ∩ D(u, alpha) \ D_v`: the RNG lune of `(u, v)` outside `D_v`.
    pub fn rng_lune_outside(
        alpha: f64,
        r: f64,
        theta: f64,
    ) -> (impl Fn(Point) -> bool, BoundingBox) {
        let f = frame(r);
        let dv = f.disk();
        let dvv = Disk {
            center: f.v,
            radius: alpha,
        };
        let du = Disk {
            center: f.polar(alpha, theta),
            radius: alpha,
        };
        (
            move |p: Point| du.contains(p) && dvv.contains(p) && !dv.contains(p),
            du.bbox(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MC_N: u64 = 2_000_000;

    #[test]
    fn lens_trivial_values() {
        assert_eq!(lens_area_dv(1.0, 0.0).unwrap(), 0.0);
        let r = 3.0;
        assert!((lens_area_dv(r, 2.0 * r).unwrap() - PI * r * r).abs() < 1e-12);
    }

    #[test]
    fn lens_at_t_equals_r() {
        let r = 8000.0;
        let expected = r * r * (PI / 6.0 + PI / 2.0 - 3f64.sqrt() / 2.0);
        let got = lens_area_dv(r, r).unwrap();
        assert!((got - expected).abs() / expected < 1e-13);
        assert!((got / (r * r) - 1.2284).abs() < 1e-4);
    }

    #[test]
    fn lens_domain_errors() {
        assert!(lens_area_dv(1.0, -0.1).is_err());
        assert!(lens_area_dv(1.0, 2.1).is_err());
        assert!(lens_area_dv(0.0, 0.5).is_err());
        // rounding slack at the upper end is absorbed
        assert!(lens_area_dv(1.0, 2.0 * (1.0 + 1e-14)).is_ok());
    }

    #[test]
    fn lens_matches_monte_carlo() {
        for (i, &(r, t)) in [(1.0, 0.5), (2.0, 1.0), (1.0, 1.7)].iter().enumerate() {
            let (region, bbox) = regions::lens(r, t);
            let est = mc_region_area(region, bbox, MC_N, 10 + i as u64);
            let closed = lens_area_dv(r, t).unwrap();
            assert!(est.z_score(closed) < 3.0, "r={r} t={t}: {closed} vs {est:?}");
        }
    }

    fn lune_atan2_form(alpha: f64, r: f64, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        alpha * alpha * theta + (alpha * alpha - r * r) * (alpha * s).atan2(r - alpha * c) + alpha * r * s
    }

    #[test]
    fn lune_regrouped_branch_agrees() {
        for &(a, r, t) in &[(0.5, 1.0, 0.3), (0.9, 1.0, 1.0), (1.5, 2.0, 0.2), (0.99, 1.0, 0.05)] {
            let got = lune_area(a, r, t).unwrap();
            let want = lune_atan2_form(a, r, t);
            assert!((got - want).abs() < 1e-13 * want.max(1.0), "{a} {r} {t}: {got} vs {want}");
        }
    }

    #[test]
    fn lune_small_alpha_large_r() {
        // 50-digit reference evaluation of the same closed form
        let got = lune_area(1e-3, 8000.0, 0.7).unwrap();
        assert!((got - 2.072_751_795_659_302_4e-7).abs() < 1e-20, "{got:e}");
        let got = lune_area(3.0, 4.0, 0.01).unwrap();
        assert!((got - 9.592_902_126_357_087e-5).abs() < 1e-17, "{got:e}");
    }

    #[test]
    fn lune_zero_at_axis() {
        assert_eq!(lune_area(1.0, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn lune_domain_errors() {
        assert!(lune_area(1.0, 2.0, -0.1).is_err());
        assert!(lune_area(1.0, 2.0, 1.4).is_err());
        assert!(lune_area(4.5, 2.0, 0.0).is_err());
        assert!(lune_area_at_split(4.5, 2.0).is_err());
    }

    #[test]
    fn lune_region_matches_caption_reading() {
        let (alpha, r, theta) = (1.0, 2.0, 0.5);
        let closed = lune_area(alpha, r, theta).unwrap();
        let (outside, bbox) = regions::lune_outside(alpha, r, theta);
        let a = mc_region_area(outside, bbox, MC_N, 1);
        let (narrow, bbox) = regions::rng_lune_outside(alpha, r, theta);
        let b = mc_region_area(narrow, bbox, MC_N, 2);
        assert!(a.z_score(closed) < 3.0, "{closed} vs {a:?}");
        assert!(b.z_score(closed) > 50.0, "{closed} vs {b:?}");
        assert!(b.estimate < closed);
    }

    #[test]
    fn lune_obtuse_branch_matches_monte_carlo() {
        for (i, &(alpha, r, theta)) in [(3.0, 2.0, 0.7), (3.9, 2.0, 0.05), (1.9, 1.0, 0.2)]
            .iter()
            .enumerate()
        {
            let (region, bbox) = regions::lune_outside(alpha, r, theta);
            let est = mc_region_area(region, bbox, MC_N, 20 + i as u64);
            let closed = lune_area(alpha, r, theta).unwrap();
            assert!(est.z_score(closed) < 3.0, "{alpha},{r},{theta}: {closed} vs {est:?}");
        }
    }

    #[test]
    fn split_form_consistency() {
        // alpha = r puts the split angle at 0, where both forms vanish.
        assert!(lune_area_at_split(1.0, 1.0).unwrap().abs() < 1e-15);
        assert!(lune_area_at_split(1e-9, 1.0).unwrap().abs() < 1e-15);
        for &(alpha, r) in &[(0.5, 4.0), (1.0, 3.0), (2.0, 3.0), (1.5, 2.0), (0.999, 1.0)] {
            let th = split_angle(alpha, r).unwrap();
            let a = lune_area(alpha, r, th).unwrap();
            let b = lune_area_at_split(alpha, r).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{alpha},{r}: {a} vs {b}");
        }
    }

    #[test]
    fn split_matches_monte_carlo() {
        let (alpha, r) = (0.5, 4.0);
        let th = split_angle(alpha, r).unwrap();
        let (region, bbox) = regions::lune_outside(alpha, r, th);
        let est = mc_region_area(region, bbox, MC_N, 5);
        assert!(est.z_score(lune_area_at_split(alpha, r).unwrap()) < 3.0);
    }

    #[test]
    fn mc_known_areas() {
        let unit = Disk::new(Point::new(0.0, 0.0), 1.0).unwrap();
        let bbox = unit.bbox();
        let est = mc_region_area(|p| unit.contains(p), bbox, 1_000_000, 3);
        assert!(est.z_score(PI) < 3.0);
        let empty = mc_region_area(|_| false, bbox, 1000, 3);
        assert_eq!((empty.estimate, empty.std_error), (0.0, 0.0));
        let again = mc_region_area(|p| unit.contains(p), bbox, 1000, 3);
        assert_eq!(again, mc_region_area(|p| unit.contains(p), bbox, 1000, 3));
    }

    #[test]
    fn lens_nondecreasing_in_t() {
        let r = 1.5;
        let mut prev = 0.0;
        for i in 0..=300 {
            let a = lens_area_dv(r, 2.0 * r * i as f64 / 300.0).unwrap();
            assert!(a + 1e-12 >= prev);
            prev = a;
        }
    }

    proptest! {
        #[test]
        fn closed_forms_finite_nonnegative(r in 1e-3f64..1e4, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let t = 2.0 * r * a;
            let lens = lens_area_dv(r, t).unwrap();
            prop_assert!(lens.is_finite() && lens >= 0.0 && lens <= PI * r.min(t).powi(2) * (1.0 + 1e-12));
            let alpha = (2.0 * r * a).max(1e-9 * r);
            let theta = theta_max(alpha, r).unwrap() * b;
            let lune = lune_area(alpha, r, theta).unwrap();
            prop_assert!(lune.is_finite() && lune >= 0.0);
            let split = lune_area_at_split(alpha, r).unwrap();
            prop_assert!(split.is_finite());
        }

        #[test]
        fn polar_point_has_expected_geometry(r in 0.1f64..10.0, a in 0.01f64..0.99, b in 0.0f64..1.0, ax in -1.0f64..1.0) {
            let f = RollingDiskFrame::new(r, r, Point::new(0.3, -2.0), (ax, 1.0)).unwrap();
            let alpha = 2.0 * r * a;
            let theta = theta_max(alpha, r).unwrap() * b * 0.999;
            let u = f.polar(alpha, theta);
            prop_assert!((u.dist(f.v) - alpha).abs() < 1e-9 * r.max(1.0));
            prop_assert!(f.disk().contains_closed(u));
        }
    }
}
