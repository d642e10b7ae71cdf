use std::collections::HashSet;

use rngperc_wasm_demo::{bound_curve, percolate, sample_graphs};
use serde_json::Value;

fn edge_set(v: &Value) -> HashSet<(u64, u64)> {
    let flat: Vec<u64> = v.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    flat.chunks(2).map(|c| (c[0], c[1])).collect()
}

#[test]
fn graphs_are_nested() {
    let v = sample_graphs(15.0, 1.0, 3).unwrap();
    let n = v["points"].as_array().unwrap().len() / 2;
    assert!(n > 100);
    let del = edge_set(&v["delaunay"]);
    let gab = edge_set(&v["gabriel"]);
    let rng = edge_set(&v["rng"]);
    assert!(rng.is_subset(&gab) && gab.is_subset(&del));
    assert!(rng.len() >= n - 1);
}

#[test]
fn percolation_extremes() {
    let none = percolate(12.0, 1.0, 1, "rng", "site", 0.0).unwrap();
    assert_eq!(none["cluster_count"], 0);
    assert_eq!(none["crossing"], false);
    assert_eq!(none["largest_cluster"], -1);
    let all = percolate(12.0, 1.0, 1, "rng", "site", 1.0).unwrap();
    assert_eq!(all["cluster_count"], 1);
    assert_eq!(all["crossing"], true);
    let n = all["points"].as_array().unwrap().len() / 2;
    assert_eq!(all["largest_size"].as_u64().unwrap() as usize, n);
}

#[test]
fn percolation_is_deterministic_and_consistent() {
    let a = percolate(10.0, 1.0, 8, "gabriel", "bond", 0.6).unwrap();
    let b = percolate(10.0, 1.0, 8, "gabriel", "bond", 0.6).unwrap();
    assert_eq!(a, b);
    let edges: Vec<u64> = a["edges"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    let open = a["open_edges"].as_array().unwrap();
    let cluster = a["cluster"].as_array().unwrap();
    for (k, c) in edges.chunks(2).enumerate() {
        if open[k] == 1 {
            assert_eq!(cluster[c[0] as usize], cluster[c[1] as usize]);
        }
    }
}

#[test]
fn bad_inputs_are_errors() {
    assert!(percolate(10.0, 1.0, 0, "lattice-ish", "site", 0.5).is_err());
    assert!(percolate(10.0, 1.0, 0, "rng", "site", 1.5).is_err());
    assert!(sample_graphs(1000.0, 1.0, 0).is_err());
    assert!(bound_curve(2.0, 1.0, 5, 1e-8).is_err());
}

#[test]
fn bound_curve_decreases() {
    let rows = bound_curve(1.0, 4.0, 3, 1e-8).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[2]["r"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    let p: Vec<f64> = rows.iter().map(|r| r["p_rn"].as_f64().unwrap()).collect();
    assert!(p[0] > p[1] && p[1] > p[2]);
    assert!((p[0] - 0.437).abs() < 5e-4);
    for r in rows {
        assert!(r["p_rn_final"].as_f64().unwrap() <= r["p_rn"].as_f64().unwrap());
    }
}
