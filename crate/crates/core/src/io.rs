//! On-disk formats: CSV tables with fixed headers and versioned JSON sidecars.
//!
//! Floats are written in Rust's shortest round-trip form, so a parse of any
//! output reproduces the in-memory values bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::Point;
use crate::graphs::{GraphError, GraphKind, ProximityGraph};
use crate::percolation::SweepResult;
use crate::point_process::{PointConfiguration, PointProcessError, Window};
use crate::rolling_ball::EventStatistics;

pub const FORMAT_VERSION: u32 = 1;

pub const POINTS_HEADER: &str = "x,y";
pub const EDGES_HEADER: &str = "u_index,v_index";
pub const SWEEP_HEADER: &str = "p,crossing_prob,std_err,replicas";
pub const EVENTS_HEADER: &str =
    "r,s,m,replicas,p_E_fail,p_F_fail,p_Am_fail,p_good,analytic_E,analytic_F,analytic_Am";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    PointProcess(#[from] PointProcessError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Shortest round-trip form, switching to scientific notation for very small
/// or very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let file_err = |source| IoError::File {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(file_err)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(file_err)?;
    fs::rename(&tmp, path).map_err(file_err)
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>, IoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        other => {
            return Err(IoError::Csv {
                line: 1,
                message: format!("expected header {header:?}, found {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect())))
}

fn field<T: std::str::FromStr>(line: usize, cols: &[&str], k: usize) -> Result<T, IoError> {
    cols.get(k)
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| IoError::Csv {
            line,
            message: format!("bad or missing column {}", k + 1),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsSidecar {
    pub format_version: u32,
    pub window: Window,
    pub intensity: Option<f64>,
    pub seed: u64,
    pub count: usize,
}

pub fn points_csv(config: &PointConfiguration) -> String {
    let mut s = String::from(POINTS_HEADER);
    s.push('\n');
    for p in &config.points {
        let _ = writeln!(s, "{},{}", fmt_f64(p.x), fmt_f64(p.y));
    }
    s
}

pub fn points_sidecar(config: &PointConfiguration) -> PointsSidecar {
    PointsSidecar {
        format_version: FORMAT_VERSION,
        window: config.window,
        intensity: config.intensity,
        seed: config.seed,
        count: config.len(),
    }
}

pub fn parse_points(csv: &str, sidecar: &PointsSidecar) -> Result<PointConfiguration, IoError> {
    check_version(sidecar.format_version)?;
    let points = rows(csv, POINTS_HEADER)?
        .map(|(line, cols)| Ok(Point::new(field(line, &cols, 0)?, field(line, &cols, 1)?)))
        .collect::<Result<Vec<_>, IoError>>()?;
    if points.len() != sidecar.count {
        return Err(IoError::Schema(format!(
            "sidecar declares {} points, csv has {}",
            sidecar.count,
            points.len()
        )));
    }
    let mut config = PointConfiguration::new(sidecar.window, points, sidecar.seed)?;
    config.intensity = sidecar.intensity;
    Ok(config)
}

fn check_version(v: u32) -> Result<(), IoError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::Schema(format!("unsupported format_version {v}")))
    }
}

/// Hash of a configuration's canonical CSV serialization.
pub fn config_hash(config: &PointConfiguration) -> String {
    sha256_hex(points_csv(config).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphManifest {
    pub format_version: u32,
    pub kind: GraphKind,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub source_config_hash: String,
}

pub fn edges_csv(graph: &ProximityGraph) -> String {
    let mut s = String::from(EDGES_HEADER);
    s.push('\n');
    for &(a, b) in &graph.edges {
        let _ = writeln!(s, "{a},{b}");
    }
    s
}

pub fn graph_manifest(graph: &ProximityGraph, config: &PointConfiguration) -> GraphManifest {
    GraphManifest {
        format_version: FORMAT_VERSION,
        kind: graph.kind,
        vertex_count: graph.vertex_count,
        edge_count: graph.edge_count(),
        source_config_hash: config_hash(config),
    }
}

pub fn parse_edges(csv: &str, manifest: &GraphManifest) -> Result<ProximityGraph, IoError> {
    check_version(manifest.format_version)?;
    let edges = rows(csv, EDGES_HEADER)?
        .map(|(line, cols)| Ok((field(line, &cols, 0)?, field(line, &cols, 1)?)))
        .collect::<Result<Vec<(u32, u32)>, IoError>>()?;
    let g = ProximityGraph::from_edges(manifest.kind, manifest.vertex_count, edges)?;
    if g.edge_count() != manifest.edge_count {
        return Err(IoError::Schema(format!(
            "manifest declares {} edges, csv has {}",
            manifest.edge_count,
            g.edge_count()
        )));
    }
    Ok(g)
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for i in 0..sweep.p_grid.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(sweep.p_grid[i]),
            fmt_f64(sweep.crossing_prob[i]),
            fmt_f64(sweep.std_err[i]),
            sweep.replicas
        );
    }
    s
}

pub fn event_csv(stats: &[EventStatistics]) -> String {
    let mut s = String::from(EVENTS_HEADER);
    s.push('\n');
    for st in stats {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(st.r),
            fmt_f64(st.s),
            st.m,
            st.replicas,
            fmt_f64(st.e_fail.p),
            fmt_f64(st.f_fail.p),
            fmt_f64(st.am_fail.p),
            fmt_f64(st.good.p),
            fmt_f64(st.analytic_e),
            fmt_f64(st.analytic_f),
            fmt_f64(st.analytic_am)
        );
    }
    s
}

/// `value` serialized with a leading `format_version` field.
pub fn versioned_json<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut v = serde_json::to_value(value)?;
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("format_version".into(), FORMAT_VERSION.into());
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// Checks that `json` is an object carrying every key listed in the schema's
/// top-level `required` array.
pub fn check_required(json: &serde_json::Value, schema: &serde_json::Value) -> Result<(), IoError> {
    let obj = json.as_object().ok_or_else(|| IoError::Schema("not an object".into()))?;
    let required = schema
        .get("required")
        .and_then(|r| r.as_array())
        .ok_or_else(|| IoError::Schema("schema has no required list".into()))?;
    for key in required.iter().filter_map(|k| k.as_str()) {
        if !obj.contains_key(key) {
            return Err(IoError::Schema(format!("missing field {key}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;
    use crate::percolation::{estimate_pc, sweep, Ensemble, EstimateOptions};
    use crate::point_process::{sample_poisson, MarkMode};

    fn schema(name: &str) -> serde_json::Value {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
        serde_json::from_str(&read_text(&path).unwrap()).unwrap()
    }

    #[test]
    fn points_round_trip_exactly() {
        let cfg = sample_poisson(Window::new(-1.5, 0.0, 3.0, 2.0).unwrap(), 7.3, 9).unwrap();
        let back = parse_points(&points_csv(&cfg), &points_sidecar(&cfg)).unwrap();
        assert_eq!(back, cfg);
        let side = serde_json::to_value(points_sidecar(&cfg)).unwrap();
        check_required(&side, &schema("points.schema.json")).unwrap();
    }

    #[test]
    fn edges_round_trip() {
        let cfg = sample_poisson(Window::square(8.0).unwrap(), 1.0, 2).unwrap();
        for kind in [GraphKind::Delaunay, GraphKind::Gabriel, GraphKind::Rng] {
            let g = graphs::build(&cfg, kind).unwrap();
            let m = graph_manifest(&g, &cfg);
            assert_eq!(m.source_config_hash.len(), 64);
            assert_eq!(parse_edges(&edges_csv(&g), &m).unwrap(), g);
            check_required(&serde_json::to_value(&m).unwrap(), &schema("graph.schema.json")).unwrap();
        }
    }

    #[test]
    fn malformed_inputs_rejected() {
        let cfg = sample_poisson(Window::square(2.0).unwrap(), 1.0, 2).unwrap();
        let mut side = points_sidecar(&cfg);
        assert!(matches!(parse_points("a,b\n", &side), Err(IoError::Csv { line: 1, .. })));
        assert!(matches!(parse_points("x,y\n1,zz\n", &side), Err(IoError::Csv { .. })));
        side.count += 1;
        assert!(matches!(parse_points(&points_csv(&cfg), &side), Err(IoError::Schema(_))));
        side.format_version = 99;
        assert!(parse_points(&points_csv(&cfg), &side).is_err());
    }

    #[test]
    fn sweep_and_estimate_formats() {
        let ens = Ensemble {
            window: Window::square(6.0).unwrap(),
            intensity: 1.0,
            kind: GraphKind::Rng,
            mode: MarkMode::Site,
            master_seed: 1,
        };
        let sw = sweep(&ens, &[0.0, 1.0], 4).unwrap();
        let csv = sweep_csv(&sw);
        assert_eq!(csv.lines().next(), Some(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 3);
        let opts = EstimateOptions {
            tolerance: 0.5,
            initial_replicas: 16,
            max_replicas: 16,
            bootstrap_resamples: 100,
            ..EstimateOptions::default()
        };
        let est = estimate_pc(&ens, &opts).unwrap();
        let v: serde_json::Value = serde_json::from_str(&versioned_json(&est).unwrap()).unwrap();
        check_required(&v, &schema("estimate.schema.json")).unwrap();
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("rngperc-io-{}", std::process::id()));
        let path = dir.join("sub").join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(read_text(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -2.5, 1e-300, 8.74e-8, 3.0e20, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(8.74e-8), "8.74e-8");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn sha256_reference() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
