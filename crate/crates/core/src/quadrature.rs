//! Adaptive Gauss–Kronrod (7/15) quadrature, in linear and log domain.
//!
//! The log-domain integrator takes `ln f(x)` and returns `ln ∫ f`, scaling each
//! panel by its largest node value so integrands like `exp(-10⁷)` never
//! underflow. Panel sums are reduced left-to-right with log-sum-exp, so results
//! do not depend on refinement order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("no convergence after {panels} panels on [{a}, {b}] (estimated relative error {rel_error:e}, target {tol:e})")]
    NoConvergence {
        a: f64,
        b: f64,
        panels: usize,
        rel_error: f64,
        tol: f64,
    },
    #[error("integrand produced NaN at x = {0}")]
    NotANumber(f64),
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stable `ln(e^a + e^b)`.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Stable `ln(1 − e^x)` for `x ≤ 0`.
#[inline]
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadDiagnostics {
    pub panels: usize,
    pub evaluations: usize,
    /// Estimated relative error of the result (≈ absolute error of its log).
    pub rel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogIntegral {
    pub log_value: f64,
    pub diagnostics: QuadDiagnostics,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

// max-heap on error; `value`/`error` are logs in the log-domain integrator
struct ByError(Panel);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.0.error == other.0.error
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then(other.0.a.total_cmp(&self.0.a))
    }
}

fn nodes(a: f64, b: f64) -> ([f64; 15], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for i in 0..7 {
        x[i] = c - h * XGK[i];
        x[14 - i] = c + h * XGK[i];
    }
    x[7] = c;
    (x, h)
}

fn kronrod_weight(i: usize) -> f64 {
    WGK[if i <= 7 { i } else { 14 - i }]
}

fn gauss_weight(i: usize) -> f64 {
    let k = if i <= 7 { i } else { 14 - i };
    if k % 2 == 1 {
        WG[k / 2]
    } else {
        0.0
    }
}

fn log_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let (x, h) = nodes(a, b);
    let mut l = [0.0; 15];
    for i in 0..15 {
        l[i] = f(x[i]);
        if l[i].is_nan() {
            return Err(QuadratureError::NotANumber(x[i]));
        }
    }
    let m = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(Panel {
            a,
            b,
            value: f64::NEG_INFINITY,
            error: f64::NEG_INFINITY,
        });
    }
    let (mut k, mut g) = (0.0, 0.0);
    for i in 0..15 {
        let e = (l[i] - m).exp();
        k += kronrod_weight(i) * e;
        g += gauss_weight(i) * e;
    }
    let diff = (k - g).abs();
    Ok(Panel {
        a,
        b,
        value: m + (h * k).ln(),
        error: if diff > 0.0 { m + (h * diff).ln() } else { f64::NEG_INFINITY },
    })
}

fn linear_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let (x, h) = nodes(a, b);
    let (mut k, mut g) = (0.0, 0.0);
    for i in 0..15 {
        let y = f(x[i]);
        if y.is_nan() {
            return Err(QuadratureError::NotANumber(x[i]));
        }
        k += kronrod_weight(i) * y;
        g += gauss_weight(i) * y;
    }
    Ok(Panel {
        a,
        b,
        value: h * k,
        error: h * (k - g).abs(),
    })
}

fn initial_cuts(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// `ln ∫_a^b exp(log_f(x)) dx`, refined until the relative error estimate is
/// at most `tol`.
pub fn integrate_log<F: Fn(f64) -> f64>(
    log_f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<LogIntegral, QuadratureError> {
    if !(b > a) {
        return Ok(LogIntegral {
            log_value: f64::NEG_INFINITY,
            diagnostics: QuadDiagnostics {
                panels: 0,
                evaluations: 0,
                rel_error: 0.0,
            },
        });
    }
    let cuts = initial_cuts(a, b, breakpoints);
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        heap.push(ByError(log_panel(&log_f, w[0], w[1])?));
        evaluations += 15;
    }
    loop {
        let panels: Vec<Panel> = heap.iter().map(|p| p.0).collect();
        let total = log_sum_exp(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
        let err = log_sum_exp(&panels.iter().map(|p| p.error).collect::<Vec<_>>());
        let rel = if total == f64::NEG_INFINITY { 0.0 } else { (err - total).exp() };
        if rel <= tol || heap.len() >= max_panels {
            if rel > tol {
                return Err(QuadratureError::NoConvergence {
                    a,
                    b,
                    panels: heap.len(),
                    rel_error: rel,
                    tol,
                });
            }
            let mut ordered = panels;
            ordered.sort_by(|x, y| x.a.total_cmp(&y.a));
            let log_value = ordered.iter().fold(f64::NEG_INFINITY, |acc, p| log_add(acc, p.value));
            return Ok(LogIntegral {
                log_value,
                diagnostics: QuadDiagnostics {
                    panels: ordered.len(),
                    evaluations,
                    rel_error: rel,
                },
            });
        }
        let worst = heap.pop().expect("nonempty").0;
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(ByError(log_panel(&log_f, worst.a, mid)?));
        heap.push(ByError(log_panel(&log_f, mid, worst.b)?));
        evaluations += 30;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

/// Plain adaptive integration to `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<Integral, QuadratureError> {
    if !(b > a) {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            panels: 0,
        });
    }
    let cuts = initial_cuts(a, b, breakpoints);
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        heap.push(ByError(linear_panel(&f, w[0], w[1])?));
    }
    loop {
        let err: f64 = heap.iter().map(|p| p.0.error).sum();
        if err <= abs_tol || heap.len() >= max_panels {
            if err > abs_tol {
                let total: f64 = heap.iter().map(|p| p.0.value).sum();
                return Err(QuadratureError::NoConvergence {
                    a,
                    b,
                    panels: heap.len(),
                    rel_error: err / total.abs().max(f64::MIN_POSITIVE),
                    tol: abs_tol,
                });
            }
            let mut ordered: Vec<Panel> = heap.into_iter().map(|p| p.0).collect();
            ordered.sort_by(|x, y| x.a.total_cmp(&y.a));
            return Ok(Integral {
                value: ordered.iter().map(|p| p.value).sum(),
                abs_error: err,
                panels: ordered.len(),
            });
        }
        let worst = heap.pop().expect("nonempty").0;
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(ByError(linear_panel(&f, worst.a, mid)?));
        heap.push(ByError(linear_panel(&f, mid, worst.b)?));
    }
}
