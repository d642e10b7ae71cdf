//! Analytic bounds for the rolling-ball renormalization and the certificate
//! that chains them into an upper bound on the site threshold of the RNG.
//!
//! Everything except the final arithmetic is carried in log domain.

use std::f64::consts::{E, FRAC_PI_3, LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::geometry::{self, GeometryError};
use crate::quadrature::{self, log1m_exp, log_add, QuadDiagnostics, QuadratureError};

/// Default ε. `1 − DEFAULT_EPSILON` is [`ONE_INDEPENDENT_THRESHOLD`].
pub const DEFAULT_EPSILON: f64 = 0.1361;
/// Edge probability above which every 1-independent bond model on ℤ² percolates.
pub const ONE_INDEPENDENT_THRESHOLD: f64 = 0.8639;
pub const FORMAT_VERSION: u32 = 1;

const THRESHOLD_SLACK: f64 = 1e-12;
const MAX_OUTER_PANELS: usize = 20_000;
const MAX_INNER_PANELS: usize = 4_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
}

fn positive(name: &'static str, value: f64) -> Result<(), BoundError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(BoundError::Parameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    pub r: f64,
    pub s: f64,
    pub m: u64,
    pub epsilon: f64,
}

impl BoundParameters {
    pub fn new(r: f64, s: f64, m: u64, epsilon: f64) -> Result<Self, BoundError> {
        positive("r", r)?;
        positive("s", s)?;
        if m == 0 {
            return Err(BoundError::Parameter { name: "m", value: 0.0 });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(BoundError::Parameter {
                name: "epsilon",
                value: epsilon,
            });
        }
        Ok(Self { r, s, m, epsilon })
    }

    /// `s = r`, default `m` and ε.
    pub fn with_defaults(r: f64) -> Result<Self, BoundError> {
        positive("r", r)?;
        Self::new(r, r, default_m(r, r), DEFAULT_EPSILON)
    }
}

/// Mean number of points in the two-square region plus one disk:
/// `2r(2r+2s) + πr²`.
pub fn region_mean(r: f64, s: f64) -> f64 {
    2.0 * r * (2.0 * r + 2.0 * s) + PI * r * r
}

/// `⌈e·μ⌉ + 1`; for `r = s` this is `⌈e(8+π)r²⌉ + 1`.
pub fn default_m(r: f64, s: f64) -> u64 {
    (E * region_mean(r, s)).ceil() as u64 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrnBound {
    /// `ln` of the upper bound on the failure probability of one rolling step.
    pub log_value: f64,
    /// `−|D_v ∩ D(v, s)|`: no point at all within reach.
    pub log_empty_term: f64,
    /// `ln` of the polar double integral.
    pub log_integral: f64,
    pub outer: QuadDiagnostics,
    pub inner_evaluations: usize,
}

fn outer_breaks(upper: f64) -> Vec<f64> {
    let mut b = Vec::new();
    let mut x = 1.0 / 16.0;
    while x < upper {
        b.push(x);
        x *= 2.0;
    }
    b
}

fn reach(r: f64, s: f64) -> f64 {
    s.min(2.0 * r)
}

/// `ln ∫_{θ₀}^{θmax} (1 − e^{−L(α,θ)}) dθ`.
fn log_inner_j(alpha: f64, r: f64, theta0: f64, tol: f64) -> Result<(f64, usize), BoundError> {
    let tmax = geometry::theta_max(alpha, r)?;
    let split = tmax - FRAC_PI_3;
    let breaks: Vec<f64> = if split > theta0 { vec![split] } else { vec![] };
    let res = quadrature::integrate_log(
        |t| match geometry::lune_area(alpha, r, t) {
            Ok(l) => log1m_exp(-l),
            Err(_) => f64::NAN,
        },
        theta0,
        tmax,
        &breaks,
        tol,
        MAX_INNER_PANELS,
    )?;
    Ok((res.log_value, res.diagnostics.evaluations))
}

/// Upper bound on `p_{Rn,r,s}` in additive form:
/// `e^{−|D_v∩D(v,s)|} + 2∫₀ˢ α e^{−|D_v∩D(v,α)|} ∫₀^{θmax} (1 − e^{−L}) dθ dα`.
pub fn p_rn_bound(r: f64, s: f64, tol: f64) -> Result<PrnBound, BoundError> {
    positive("r", r)?;
    positive("s", s)?;
    positive("quadrature_tol", tol)?;
    let upper = reach(r, s);
    let log_empty = -geometry::lens_area_dv(r, upper)?;
    let inner_tol = tol / 4.0;
    let evals = std::cell::Cell::new(0usize);
    let failure = std::cell::RefCell::new(None);
    let outer = quadrature::integrate_log(
        |alpha| {
            let lens = match geometry::lens_area_dv(r, alpha) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(BoundError::from(e));
                    return f64::NEG_INFINITY;
                }
            };
            match log_inner_j(alpha, r, 0.0, inner_tol) {
                Ok((li, n)) => {
                    evals.set(evals.get() + n);
                    LN_2 + alpha.ln() - lens + li
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NEG_INFINITY
                }
            }
        },
        0.0,
        upper,
        &outer_breaks(upper),
        tol / 2.0,
        MAX_OUTER_PANELS,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(PrnBound {
        log_value: log_add(log_empty, outer.log_value),
        log_empty_term: log_empty,
        log_integral: outer.log_value,
        outer: outer.diagnostics,
        inner_evaluations: evals.get(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalFormBound {
    pub value: f64,
    pub integral: f64,
    pub abs_error: f64,
    /// The integral is within 1e−12 of 1, so `value` carries no information.
    pub cancellation: bool,
}

fn split_tail_factor(alpha: f64) -> f64 {
    // 2(1 − e^{−α²π/6})/α², → π/3 as α → 0
    let a2 = alpha * alpha;
    if a2 < 1e-300 {
        FRAC_PI_3
    } else {
        -2.0 * (-a2 * PI / 6.0).exp_m1() / a2
    }
}

fn linear_bound<F: Fn(f64) -> Result<f64, BoundError>>(
    integrand: F,
    upper: f64,
    tol: f64,
) -> Result<FinalFormBound, BoundError> {
    let failure = std::cell::RefCell::new(None);
    let res = quadrature::integrate(
        |a| match integrand(a) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        upper,
        &outer_breaks(upper),
        tol,
        MAX_OUTER_PANELS,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(FinalFormBound {
        value: 1.0 - res.value,
        integral: res.value,
        abs_error: res.abs_error,
        cancellation: (1.0 - res.value).abs() < 1e-12,
    })
}

/// The single-integral closed bound
/// `1 − 2∫₀ˢ α e^{−lens−L_split} [arccos(α/2r) − π/3 + 2(1 − e^{−α²π/6})/α²] dα`.
pub fn p_rn_bound_final_form(r: f64, s: f64, tol: f64) -> Result<FinalFormBound, BoundError> {
    positive("r", r)?;
    positive("s", s)?;
    positive("quadrature_tol", tol)?;
    linear_bound(
        |alpha| {
            let lens = geometry::lens_area_dv(r, alpha)?;
            let l_split = geometry::lune_area_at_split(alpha, r)?;
            let bracket = geometry::split_angle(alpha, r)? + split_tail_factor(alpha);
            Ok(2.0 * alpha * (-lens - l_split).exp() * bracket)
        },
        reach(r, s),
        tol,
    )
}

/// The printed value of `∫_{θ_split}^{θmax} e^{−L(α,θ)} dθ`:
/// `2 e^{−L_split} (1 − e^{−α²π/6}) / α²`.
pub fn split_tail_identity(alpha: f64, r: f64) -> Result<f64, BoundError> {
    positive("alpha", alpha)?;
    Ok((-geometry::lune_area_at_split(alpha, r)?).exp() * split_tail_factor(alpha))
}

/// `∫_{θ_split}^{θmax} e^{−L(α,θ)} dθ` by quadrature (`α ≤ r`).
pub fn split_tail_quadrature(alpha: f64, r: f64, tol: f64) -> Result<f64, BoundError> {
    positive("alpha", alpha)?;
    let split = geometry::split_angle(alpha, r)?;
    if split < 0.0 {
        return Err(BoundError::Parameter { name: "alpha", value: alpha });
    }
    let tmax = geometry::theta_max(alpha, r)?;
    let res = quadrature::integrate_log(
        |t| match geometry::lune_area(alpha, r, t) {
            Ok(l) => -l,
            Err(_) => f64::NAN,
        },
        split,
        tmax,
        &[],
        tol,
        MAX_INNER_PANELS,
    )?;
    Ok(res.log_value.exp())
}

/// The expression one step before the final form: exact head integral over
/// `[0, θ_split]`, printed identity for the tail (`s ≤ r`).
pub fn p_rn_bound_split_form(r: f64, s: f64, tol: f64) -> Result<FinalFormBound, BoundError> {
    positive("r", r)?;
    positive("s", s)?;
    positive("quadrature_tol", tol)?;
    if s > r {
        return Err(BoundError::Parameter { name: "s", value: s });
    }
    linear_bound(
        |alpha| {
            let lens = geometry::lens_area_dv(r, alpha)?;
            let split = geometry::split_angle(alpha, r)?;
            let head = quadrature::integrate_log(
                |t| match geometry::lune_area(alpha, r, t) {
                    Ok(l) => -l,
                    Err(_) => f64::NAN,
                },
                0.0,
                split,
                &[],
                tol / 4.0,
                MAX_INNER_PANELS,
            )?
            .log_value
            .exp();
            Ok(2.0 * alpha * (-lens).exp() * (head + split_tail_identity(alpha, r)?))
        },
        s,
        tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EBarBound {
    /// `ln(2r(2r+2s)·p_{Rn,r,s})`, uncapped.
    pub log_value: f64,
    /// The raw value is ≥ 1, so as a probability bound it says nothing.
    pub trivial: bool,
    pub p_rn: PrnBound,
}

/// Expected number of rolling steps that fail in the `2r × (2r+2s)` strip.
pub fn e_bar_bound(r: f64, s: f64, tol: f64) -> Result<EBarBound, BoundError> {
    let p_rn = p_rn_bound(r, s, tol)?;
    let log_value = (2.0 * r * (2.0 * r + 2.0 * s)).ln() + p_rn.log_value;
    Ok(EBarBound {
        log_value,
        trivial: log_value >= 0.0,
        p_rn,
    })
}

/// `ln Π(no point in a radius-r disk) = −πr²`.
pub fn f_bar_bound(r: f64) -> Result<f64, BoundError> {
    positive("r", r)?;
    Ok(-PI * r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmTail {
    pub mean: f64,
    /// `ln P(N > m)` for `N ~ Poisson(mean)`.
    pub log_exact: f64,
    /// `ln(μ^{m+1}/(m+1)!)`.
    pub log_simplified: f64,
}

fn log_poisson_pmf(k: u64, mu: f64) -> f64 {
    let kf = k as f64;
    kf * mu.ln() - mu - ln_gamma(kf + 1.0)
}

/// `ln P(N > m)` for `N ~ Poisson(mu)`, summing whichever tail converges
/// geometrically.
pub fn log_poisson_upper_tail(m: u64, mu: f64) -> f64 {
    if mu == 0.0 {
        return f64::NEG_INFINITY;
    }
    if (m as f64) + 1.0 >= mu {
        // upward from k = m+1, ratio μ/(k+1) < 1
        let mut k = m + 1;
        let mut term = log_poisson_pmf(k, mu);
        let mut acc = term;
        loop {
            term += mu.ln() - ((k + 1) as f64).ln();
            k += 1;
            acc = log_add(acc, term);
            if term < acc - 45.0 {
                return acc;
            }
        }
    } else {
        // P(N ≤ m) summed downward from k = m, ratio k/μ < 1
        let mut k = m;
        let mut term = log_poisson_pmf(k, mu);
        let mut acc = term;
        while k > 0 {
            term += (k as f64).ln() - mu.ln();
            k -= 1;
            acc = log_add(acc, term);
            if term < acc - 45.0 {
                break;
            }
        }
        log1m_exp(acc.min(0.0))
    }
}

/// Upper tail of the number of points in the region, exact and simplified.
pub fn a_m_tail(r: f64, s: f64, m: u64) -> Result<AmTail, BoundError> {
    positive("r", r)?;
    positive("s", s)?;
    let mean = region_mean(r, s);
    let mf = (m + 1) as f64;
    Ok(AmTail {
        mean,
        log_exact: log_poisson_upper_tail(m, mean),
        log_simplified: mf * mean.ln() - ln_gamma(mf + 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Log-domain slack of the inequality (positive when it holds).
    pub log_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub format_version: u32,
    pub params: BoundParameters,
    pub quadrature_tol: f64,
    pub log_p_rn_bound: f64,
    pub log_e_bar: f64,
    pub log10_e_bar: f64,
    pub e_bar_trivial: bool,
    pub log_f_bar: f64,
    pub log_a_m: f64,
    pub log_a_m_simplified: f64,
    pub log_bad_event_total: f64,
    pub bad_event_total: f64,
    pub good_event_lower: f64,
    pub site_prob_p: f64,
    pub log_product: f64,
    pub product: f64,
    pub final_product: f64,
    pub threshold: f64,
    pub pc_site_upper: f64,
    pub checks: Vec<Check>,
    pub first_failed: Option<String>,
    pub valid: bool,
    pub quadrature: QuadDiagnostics,
    pub inner_evaluations: usize,
}

pub const CHECK_BAD_EVENTS: &str = "bad_event_total <= epsilon/2";
pub const CHECK_PRODUCT: &str = "(1-epsilon/2)(1-epsilon/(2m))^m > 1-epsilon";
pub const CHECK_THRESHOLD: &str = "1-epsilon >= 0.8639";

/// Evaluates the whole chain for `params`.
pub fn certificate(params: BoundParameters, tol: f64) -> Result<CertificateReport, BoundError> {
    let BoundParameters { r, s, m, epsilon } = BoundParameters::new(params.r, params.s, params.m, params.epsilon)?;
    positive("quadrature_tol", tol)?;
    let e_bar = e_bar_bound(r, s, tol)?;
    let log_f = f_bar_bound(r)?;
    let a_m = a_m_tail(r, s, m)?;

    let log_bad = [LN_2 + e_bar.log_value, LN_2 + log_f, a_m.log_exact]
        .into_iter()
        .fold(f64::NEG_INFINITY, log_add);
    let bad_total = log_bad.exp();
    let good_lower = 1.0 - bad_total;

    let mf = m as f64;
    let half = epsilon / 2.0;
    let site_p = 1.0 - half / mf;
    let log_pm = mf * (-half / mf).ln_1p();
    let log_product = (-half).ln_1p() + log_pm;
    let product = log_product.exp();
    let final_product = good_lower * log_pm.exp();

    let need = 10.0 * tol;
    let bad_margin = half.ln() - log_bad;
    let prod_margin = log_product - (-epsilon).ln_1p();
    let thr_margin = (1.0 - epsilon).ln() - ONE_INDEPENDENT_THRESHOLD.ln();
    let checks = vec![
        Check {
            name: CHECK_BAD_EVENTS.into(),
            passed: bad_margin >= need,
            log_margin: bad_margin,
        },
        Check {
            name: CHECK_PRODUCT.into(),
            passed: prod_margin >= need,
            log_margin: prod_margin,
        },
        Check {
            name: CHECK_THRESHOLD.into(),
            passed: thr_margin >= -THRESHOLD_SLACK,
            log_margin: thr_margin,
        },
    ];
    let first_failed = checks.iter().find(|c| !c.passed).map(|c| c.name.clone());
    Ok(CertificateReport {
        format_version: FORMAT_VERSION,
        params: BoundParameters { r, s, m, epsilon },
        quadrature_tol: tol,
        log_p_rn_bound: e_bar.p_rn.log_value,
        log_e_bar: e_bar.log_value,
        log10_e_bar: e_bar.log_value / std::f64::consts::LN_10,
        e_bar_trivial: e_bar.trivial,
        log_f_bar: log_f,
        log_a_m: a_m.log_exact,
        log_a_m_simplified: a_m.log_simplified,
        log_bad_event_total: log_bad,
        bad_event_total: bad_total,
        good_event_lower: good_lower,
        site_prob_p: site_p,
        log_product,
        product,
        final_product,
        threshold: ONE_INDEPENDENT_THRESHOLD,
        pc_site_upper: site_p,
        valid: first_failed.is_none(),
        first_failed,
        checks,
        quadrature: e_bar.p_rn.outer,
        inner_evaluations: e_bar.p_rn.inner_evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub r: f64,
    pub s: f64,
    pub m: u64,
    pub log_bad_event_total: f64,
    pub valid: bool,
    pub pc_site_upper: f64,
}

/// Certificates over every `(r, s)` pair with default `m`, in input order.
pub fn grid_search(rs: &[f64], ss: &[f64], epsilon: f64, tol: f64) -> Result<Vec<GridPoint>, BoundError> {
    let pairs: Vec<(f64, f64)> = rs.iter().flat_map(|&r| ss.iter().map(move |&s| (r, s))).collect();
    pairs
        .par_iter()
        .map(|&(r, s)| {
            let rep = certificate(BoundParameters::new(r, s, default_m(r, s), epsilon)?, tol)?;
            Ok(GridPoint {
                r,
                s,
                m: rep.params.m,
                log_bad_event_total: rep.log_bad_event_total,
                valid: rep.valid,
                pc_site_upper: rep.pc_site_upper,
            })
        })
        .collect()
}

/// Best certified point of a grid: the smallest `pc_site_upper` among valid ones.
pub fn best_certified(points: &[GridPoint]) -> Option<&GridPoint> {
    points
        .iter()
        .filter(|p| p.valid)
        .min_by(|a, b| a.pc_site_upper.total_cmp(&b.pc_site_upper))
}

#[cfg(test)]
mod tests;
