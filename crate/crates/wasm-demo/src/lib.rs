//! Three operations for the static page in `www/`, each returning a JSON string.
//!
//! The plain functions are usable natively; the `#[wasm_bindgen]` wrappers
//! turn errors into JavaScript exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use rngperc::bounds;
use rngperc::graphs::{self, GraphKind};
use rngperc::percolation;
use rngperc::point_process::{self, MarkMode, PointConfiguration, Window};

/// Keeps the page responsive on slow machines.
pub const MAX_EXPECTED_POINTS: f64 = 20_000.0;

fn sample(side: f64, intensity: f64, seed: u64) -> Result<PointConfiguration, String> {
    let window = Window::square(side).map_err(|e| e.to_string())?;
    if intensity * window.area() > MAX_EXPECTED_POINTS {
        return Err(format!("expected point count above {MAX_EXPECTED_POINTS}"));
    }
    point_process::sample_poisson(window, intensity, seed).map_err(|e| e.to_string())
}

fn flat_points(cfg: &PointConfiguration) -> Vec<f64> {
    cfg.points.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn flat_edges(edges: &[(u32, u32)]) -> Vec<u32> {
    edges.iter().flat_map(|&(a, b)| [a, b]).collect()
}

/// Poisson sample with its Delaunay, Gabriel and RNG edge lists.
pub fn sample_graphs(side: f64, intensity: f64, seed: u64) -> Result<Value, String> {
    let cfg = sample(side, intensity, seed)?;
    let mut out = json!({ "side": side, "points": flat_points(&cfg) });
    for kind in [GraphKind::Delaunay, GraphKind::Gabriel, GraphKind::Rng] {
        let g = graphs::build(&cfg, kind).map_err(|e| e.to_string())?;
        out[kind.to_string()] = json!(flat_edges(&g.edges));
    }
    Ok(out)
}

/// Open clusters on one graph at retention probability `p`.
pub fn percolate(
    side: f64,
    intensity: f64,
    seed: u64,
    kind: &str,
    mode: &str,
    p: f64,
) -> Result<Value, String> {
    let kind: GraphKind = kind.parse()?;
    let mode: MarkMode = mode.parse()?;
    let cfg = sample(side, intensity, seed)?;
    let g = graphs::build(&cfg, kind).map_err(|e| e.to_string())?;
    let marks = match mode {
        MarkMode::Site => point_process::mark_sites(&cfg, p, seed),
        MarkMode::Bond => point_process::mark_bonds(&g, p, seed),
    }
    .map_err(|e| e.to_string())?;
    let labels = percolation::open_clusters(&g, &marks).map_err(|e| e.to_string())?;
    let delta = percolation::default_delta(intensity);
    let largest = labels
        .cluster_sizes
        .iter()
        .enumerate()
        .max_by_key(|&(i, &n)| (n, std::cmp::Reverse(i)))
        .map(|(i, _)| i as i64)
        .unwrap_or(-1);
    let cluster: Vec<i64> = labels.cluster_id.iter().map(|c| c.map_or(-1, i64::from)).collect();
    let open_edges: Vec<u8> = g
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| {
            u8::from(match mode {
                MarkMode::Site => marks.marks[a as usize] && marks.marks[b as usize],
                MarkMode::Bond => marks.marks[e],
            })
        })
        .collect();
    Ok(json!({
        "side": side,
        "points": flat_points(&cfg),
        "edges": flat_edges(&g.edges),
        "open_edges": open_edges,
        "cluster": cluster,
        "cluster_count": labels.cluster_count(),
        "largest_cluster": largest,
        "largest_size": labels.largest_size,
        "crossing": percolation::crossing(&cfg, &labels, delta),
    }))
}

/// Rolling-step failure bound at `n` values of `r` spaced evenly on a log scale, with `s = r`.
pub fn bound_curve(r_min: f64, r_max: f64, n: usize, tol: f64) -> Result<Value, String> {
    if !(r_min > 0.0 && r_max >= r_min && (1..=200).contains(&n)) {
        return Err("need 0 < r_min <= r_max and 1 <= n <= 200".into());
    }
    let ratio = if n == 1 { 1.0 } else { (r_max / r_min).powf(1.0 / (n - 1) as f64) };
    let rows = (0..n)
        .map(|k| {
            let r = r_min * ratio.powi(k as i32);
            let e = bounds::e_bar_bound(r, r, tol).map_err(|e| e.to_string())?;
            let fin = bounds::p_rn_bound_final_form(r, r, tol).map_err(|e| e.to_string())?;
            Ok(json!({
                "r": r,
                "p_rn": e.p_rn.log_value.exp(),
                "p_rn_final": fin.value,
                "log10_e_bar": e.log_value / std::f64::consts::LN_10,
            }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Value::Array(rows))
}

#[wasm_bindgen(js_name = sampleGraphs)]
pub fn sample_graphs_js(side: f64, intensity: f64, seed: u32) -> Result<String, JsValue> {
    sample_graphs(side, intensity, u64::from(seed))
        .map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = percolate)]
pub fn percolate_js(
    side: f64,
    intensity: f64,
    seed: u32,
    kind: &str,
    mode: &str,
    p: f64,
) -> Result<String, JsValue> {
    percolate(side, intensity, u64::from(seed), kind, mode, p)
        .map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = boundCurve)]
pub fn bound_curve_js(r_min: f64, r_max: f64, n: u32, tol: f64) -> Result<String, JsValue> {
    bound_curve(r_min, r_max, n as usize, tol)
        .map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e))
}
