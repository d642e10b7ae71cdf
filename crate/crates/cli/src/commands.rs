use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use rngperc::bounds::{self, BoundParameters};
use rngperc::graphs;
use rngperc::io;
use rngperc::percolation::{self, Ensemble, EstimateOptions};
use rngperc::point_process::{self, MarkMode, PointConfiguration};
use rngperc::rolling_ball;

use crate::args::*;
use crate::manifest::Outputs;

pub fn run(cli: Cli) -> Result<()> {
    let mut params = serde_json::to_value(&cli.command)?;
    if let Some(obj) = params.as_object_mut() {
        obj.insert("workers".into(), json!(cli.workers));
    }
    let name = params["command"].as_str().unwrap_or_default().to_string();
    match cli.command {
        Command::Sample(a) => sample(a, &name, params),
        Command::Graph(a) => graph(a, &name, params),
        Command::Percolate(a) => percolate(a, &name, params),
        Command::Sweep(a) => sweep(a, &name, params),
        Command::EstimatePc(a) => estimate(a, &name, params),
        Command::Bound(a) => bound(a, &name, params),
        Command::Certificate(a) => certificate(a, &name, params),
        Command::Rollingball(a) => rollingball(a, &name, params),
    }
}

fn json_bytes<T: serde::Serialize>(v: &T) -> Result<Vec<u8>> {
    Ok((serde_json::to_string_pretty(v)? + "\n").into_bytes())
}

fn load_points(csv: &Path) -> Result<PointConfiguration> {
    let sidecar_path = csv.with_extension("json");
    let sidecar: io::PointsSidecar = serde_json::from_str(&io::read_text(&sidecar_path)?)
        .with_context(|| format!("parsing {}", sidecar_path.display()))?;
    Ok(io::parse_points(&io::read_text(csv)?, &sidecar)?)
}

fn sample(a: SampleArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let cfg = point_process::sample_poisson(a.window.0, a.intensity, a.seed.seed)?;
    let mut out = Outputs::new(&a.out);
    out.write_primary(io::points_csv(&cfg).as_bytes())?;
    out.write(&a.out.with_extension("json"), &json_bytes(&io::points_sidecar(&cfg))?)?;
    out.finish(name, params, Some(a.seed.seed))
}

fn graph(a: GraphArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let cfg = load_points(&a.input)?;
    let g = graphs::build(&cfg, a.kind)?;
    let mut out = Outputs::new(&a.out);
    out.write_primary(io::edges_csv(&g).as_bytes())?;
    out.write(&a.out.with_extension("json"), &json_bytes(&io::graph_manifest(&g, &cfg))?)?;
    out.finish(name, params, Some(cfg.seed))
}

fn percolate(a: PercolateArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let cfg = load_points(&a.input)?;
    let g = graphs::build(&cfg, a.kind)?;
    let marks = match a.mode {
        MarkMode::Site => point_process::mark_sites(&cfg, a.p, a.seed.seed)?,
        MarkMode::Bond => point_process::mark_bonds(&g, a.p, a.seed.seed)?,
    };
    let labels = percolation::open_clusters(&g, &marks)?;
    let intensity = cfg.intensity.unwrap_or(cfg.len().max(1) as f64 / cfg.window.area());
    let delta = percolation::default_delta(intensity);
    let crossed = percolation::crossing(&cfg, &labels, delta);
    let mut csv = String::from("index,open,cluster_id\n");
    for (i, id) in labels.cluster_id.iter().enumerate() {
        let open = match a.mode {
            MarkMode::Site => marks.marks[i],
            MarkMode::Bond => true,
        };
        let id = id.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{i},{},{id}", u8::from(open));
    }
    let summary = json!({
        "format_version": io::FORMAT_VERSION,
        "kind": a.kind,
        "mode": a.mode,
        "p": a.p,
        "seed": a.seed.seed,
        "open_count": marks.open_count(),
        "cluster_count": labels.cluster_count(),
        "largest_size": labels.largest_size,
        "delta": delta,
        "crossing": crossed,
    });
    let mut out = Outputs::new(&a.out);
    out.write_primary(csv.as_bytes())?;
    out.write(&a.out.with_extension("json"), &json_bytes(&summary)?)?;
    out.finish(name, params, Some(a.seed.seed))
}

fn ensemble(e: &EnsembleArgs) -> Ensemble {
    Ensemble {
        window: e.window.0,
        intensity: e.intensity,
        kind: e.kind,
        mode: e.mode,
        master_seed: e.seed.seed,
    }
}

fn sweep(a: SweepArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let ens = ensemble(&a.ensemble);
    let result = percolation::sweep(&ens, &a.p_grid.0, a.replicas)?;
    let mut out = Outputs::new(&a.out);
    out.write_primary(io::sweep_csv(&result).as_bytes())?;
    out.finish(name, params, Some(ens.master_seed))
}

fn estimate(a: EstimateArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let ens = ensemble(&a.ensemble);
    let opts = EstimateOptions {
        tolerance: a.tol,
        initial_replicas: a.replicas,
        max_replicas: a.max_replicas,
        bootstrap_resamples: a.bootstrap,
        ..EstimateOptions::default()
    };
    let est = percolation::estimate_pc(&ens, &opts)?;
    let mut out = Outputs::new(&a.out);
    out.write_primary(io::versioned_json(&est)?.as_bytes())?;
    out.finish(name, params, Some(ens.master_seed))
}

fn bound(a: BoundArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let s = a.s.unwrap_or(a.r);
    let e_bar = bounds::e_bar_bound(a.r, s, a.tol)?;
    let fin = bounds::p_rn_bound_final_form(a.r, s, a.tol)?;
    let ln10 = std::f64::consts::LN_10;
    let report = json!({
        "format_version": io::FORMAT_VERSION,
        "r": a.r,
        "s": s,
        "quadrature_tol": a.tol,
        "log_p_rn_bound": e_bar.p_rn.log_value,
        "p_rn_bound": e_bar.p_rn.log_value.exp(),
        "log_empty_term": e_bar.p_rn.log_empty_term,
        "log_integral": e_bar.p_rn.log_integral,
        "final_form": fin,
        "log_e_bar": e_bar.log_value,
        "log10_e_bar": e_bar.log_value / ln10,
        "e_bar_trivial": e_bar.trivial,
        "log_f_bar": bounds::f_bar_bound(a.r)?,
        "quadrature": e_bar.p_rn.outer,
        "inner_evaluations": e_bar.p_rn.inner_evaluations,
    });
    let mut out = Outputs::new(&a.out);
    out.write_primary(&json_bytes(&report)?)?;
    out.finish(name, params, None)
}

fn certificate(a: CertificateArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let s = a.s.unwrap_or(a.r);
    let m = a.m.unwrap_or_else(|| bounds::default_m(a.r, s));
    let report = bounds::certificate(BoundParameters::new(a.r, s, m, a.epsilon)?, a.tol)?;
    let mut out = Outputs::new(&a.out);
    out.write_primary(&json_bytes(&report)?)?;
    out.finish(name, params, None)
}

fn rollingball(a: RollingArgs, name: &str, params: serde_json::Value) -> Result<()> {
    let s = a.s.unwrap_or(a.r);
    let m = a.m.unwrap_or_else(|| bounds::default_m(a.r, s));
    let stats = rolling_ball::event_statistics(a.r, s, m, a.replicas, a.seed.seed, a.tol)?;
    let mut out = Outputs::new(&a.out);
    out.write_primary(io::event_csv(std::slice::from_ref(&stats)).as_bytes())?;
    out.write(&a.out.with_extension("json"), &json_bytes(&stats)?)?;
    out.finish(name, params, Some(a.seed.seed))
}
