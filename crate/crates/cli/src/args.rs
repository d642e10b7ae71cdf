use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rngperc::graphs::GraphKind;
use rngperc::point_process::{MarkMode, Window};

#[derive(Debug, Parser, Serialize)]
#[command(name = "rngperc", version, about = "Percolation on relative neighbourhood graphs", args_override_self = true)]
pub struct Cli {
    /// Worker threads for replica-parallel commands (output order does not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// JSON object or key=value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Poisson sample on a window: points CSV plus JSON sidecar.
    Sample(SampleArgs),
    /// Proximity graph of a points file: edge CSV plus JSON manifest.
    Graph(GraphArgs),
    /// Open clusters at one p, with the crossing indicator.
    Percolate(PercolateArgs),
    /// Crossing probability over a grid of p.
    Sweep(SweepArgs),
    /// Bootstrap estimate of the crossing threshold.
    EstimatePc(EstimateArgs),
    /// Rolling-step failure bound and the derived event bounds.
    Bound(BoundArgs),
    /// Full certificate chain for (r, s, m, epsilon).
    Certificate(CertificateArgs),
    /// Monte Carlo event statistics for the two-square region.
    Rollingball(RollingArgs),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowArg(pub Window);

impl std::str::FromStr for WindowArg {
    type Err = String;

    /// `L` (the square `[0,L]²`), `WxH`, or `x0,y0,x1,y1`.
    fn from_str(s: &str) -> Result<Self, String> {
        let nums = |parts: Vec<&str>| -> Result<Vec<f64>, String> {
            parts
                .iter()
                .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
                .collect()
        };
        let w = if s.contains(',') {
            let v = nums(s.split(',').collect())?;
            if v.len() != 4 {
                return Err("expected x0,y0,x1,y1".into());
            }
            Window::new(v[0], v[1], v[2], v[3])
        } else if s.contains('x') {
            let v = nums(s.split('x').collect())?;
            if v.len() != 2 {
                return Err("expected WxH".into());
            }
            Window::new(0.0, 0.0, v[0], v[1])
        } else {
            Window::square(nums(vec![s])?[0])
        };
        w.map(WindowArg).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PGrid(pub Vec<f64>);

impl std::str::FromStr for PGrid {
    type Err = String;

    /// Comma list `0,0.5,1` or inclusive range `lo:hi:n`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let v = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err("expected lo:hi:n".into());
            }
            let (lo, hi) = (parse(parts[0])?, parse(parts[1])?);
            let n: usize = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
            match n {
                0 => return Err("n must be positive".into()),
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            }
        } else {
            s.split(',').map(parse).collect::<Result<_, _>>()?
        };
        if v.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err("p values must lie in [0, 1]".into());
        }
        Ok(PGrid(v))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SeedArg {
    /// Master seed.
    #[arg(long, env = "RNGPERC_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value = "64")]
    pub window: WindowArg,
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub seed: SeedArg,
    /// Points CSV; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// Points CSV written by `sample` (its .json sidecar must sit next to it).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "rng")]
    pub kind: GraphKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PercolateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "rng")]
    pub kind: GraphKind,
    #[arg(long, default_value = "site")]
    pub mode: MarkMode,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub seed: SeedArg,
    /// Cluster CSV (`index,open,cluster_id`); a summary JSON goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(long, default_value = "64")]
    pub window: WindowArg,
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    #[arg(long, default_value = "rng")]
    pub kind: GraphKind,
    #[arg(long, default_value = "site")]
    pub mode: MarkMode,
    #[command(flatten)]
    #[serde(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long = "p-grid", default_value = "0:1:21")]
    pub p_grid: PGrid,
    #[arg(long, default_value_t = 64)]
    pub replicas: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Target CI half-width.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Initial replicas (doubled until the CI is narrow enough).
    #[arg(long, default_value_t = 128)]
    pub replicas: u64,
    #[arg(long = "max-replicas", default_value_t = 8192)]
    pub max_replicas: u64,
    #[arg(long, default_value_t = 2000)]
    pub bootstrap: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub r: f64,
    /// Defaults to r.
    #[arg(long)]
    pub s: Option<f64>,
    /// Quadrature tolerance on the log of each bound.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CertificateArgs {
    #[arg(long)]
    pub r: f64,
    /// Defaults to r.
    #[arg(long)]
    pub s: Option<f64>,
    /// Defaults to ceil(e·(2r(2r+2s)+πr²)) + 1.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = rngperc::bounds::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RollingArgs {
    #[arg(long)]
    pub r: f64,
    /// Defaults to r.
    #[arg(long)]
    pub s: Option<f64>,
    /// Defaults as for `certificate`.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn config_entries(text: &str) -> Result<Vec<(String, String)>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: serde_json::Map<String, serde_json::Value> = serde_json::from_str(trimmed).context("config JSON")?;
        return v
            .into_iter()
            .map(|(k, v)| {
                let s = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Number(n) => n.to_string(),
                    serde_json::Value::Bool(b) => b.to_string(),
                    serde_json::Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                    other => bail!("config key {k}: unsupported value {other}"),
                };
                Ok((k, s))
            })
            .collect();
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (k, v) = l.split_once('=').with_context(|| format!("config line without '=': {l}"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

const SUBCOMMANDS: [&str; 8] = [
    "sample",
    "graph",
    "percolate",
    "sweep",
    "estimate-pc",
    "bound",
    "certificate",
    "rollingball",
];

/// Splices `--config` entries in as flags right after the subcommand, so that
/// flags given on the command line (which come later) win.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let (path, drop) = match argv[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (argv.get(pos + 1).context("--config needs a path")?.clone(), 2),
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let entries = config_entries(&text)?;
    let mut rest: Vec<String> = argv[..pos].iter().chain(&argv[pos + drop..]).cloned().collect();
    let sub = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map(|i| i + 1)
        .unwrap_or(rest.len());
    let flags: Vec<String> = entries
        .into_iter()
        .flat_map(|(k, v)| [format!("--{}", k.replace('_', "-")), v])
        .collect();
    rest.splice(sub..sub, flags);
    Ok(rest)
}
