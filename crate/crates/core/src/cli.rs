//! Command-line front end. `run` parses arguments (after merging an optional
//! key=value config file) and returns what should go to stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geodesic::{
    boundary_profile_with, graph_oracle_cost, internal_profile_with, surface_tensions, GeodesicOptions, LayerProfile,
    ProfileOptions, TensionPaths, Tensions,
};
use crate::model::{ModelParams, Regime, SpinState};
use crate::potential::{build_w, PotentialW};
use crate::relaxation::{
    build_recovery_sequence, continuation_in_eps, initial_field, FlowOptions, RecoveryOptions, RecoveryProfiles,
};
use crate::sharp_interface::{g0_energy, measure_contact_angle, optimal_1d_config, young_angle, SharpConfig};
use crate::tf_solver::{classify, critical_q1, critical_q2, solve};

pub const THREADS_ENV: &str = "SPINOR_TF_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "spinor-tf",
    version,
    about = "Thomas-Fermi phase diagram and interface energies of spin-1 condensates"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regime, critical values and Thomas-Fermi state.
    #[command(allow_negative_numbers = true)]
    Classify(ModelCmd),
    /// Full Thomas-Fermi solution with calibration constants.
    #[command(allow_negative_numbers = true)]
    TfState(ModelCmd),
    /// Regime sweep over (q, m) written as CSV.
    #[command(allow_negative_numbers = true)]
    PhaseDiagram(PhaseCmd),
    /// Surface tension between two states by the string method.
    #[command(allow_negative_numbers = true)]
    Geodesic(GeodesicCmd),
    /// Internal or boundary layer profile.
    #[command(allow_negative_numbers = true)]
    Profile(GeodesicCmd),
    /// Constrained gradient flow of the diffuse-interface energy.
    #[command(allow_negative_numbers = true)]
    Minimize(MinimizeCmd),
    /// Energy of the recovery construction against the sharp limit.
    #[command(allow_negative_numbers = true)]
    RecoveryCheck(RecoveryCmd),
    /// Contact angle from the surface tensions, optionally measured on a 2D flow.
    #[command(allow_negative_numbers = true)]
    Young(YoungCmd),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// key=value file whose entries act as flags given before the command line ones.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; SPINOR_TF_THREADS is used when the flag is absent.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add wall-clock timings to the output (makes it non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub n: f64,
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.alpha, self.q, self.n, self.m)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PhaseCmd {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub n: f64,
    /// lo:hi:points
    #[arg(long = "q-range", allow_hyphen_values = true)]
    pub q_range: String,
    /// lo:hi:points
    #[arg(long = "m-range", allow_hyphen_values = true)]
    pub m_range: String,
    /// Also write an SVG raster of the regimes.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StringArgs {
    /// Nodes of the discretized path.
    #[arg(long = "path-nodes", default_value_t = 128)]
    pub path_nodes: usize,
}

impl StringArgs {
    fn options(&self) -> GeodesicOptions {
        GeodesicOptions { nodes: self.path_nodes, ..Default::default() }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GeodesicCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    /// ab, 0a or 0b.
    #[arg(long, default_value = "ab")]
    pub pair: String,
    /// Lattice resolution of the graph oracle; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub oracle: usize,
    /// CSV file for the path or profile samples.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub string: StringArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: u8,
    #[arg(long, default_value_t = 1024)]
    pub nodes: usize,
    /// Comma-separated, decreasing.
    #[arg(long, default_value = "0.04,0.02,0.01")]
    pub eps: String,
}

impl GridArgs {
    fn eps_list(&self) -> Result<Vec<f64>> {
        let list: Vec<f64> = self
            .eps
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad eps entry '{s}'"))))
            .collect::<Result<_>>()?;
        if list.is_empty() || list.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Usage("eps entries must be positive".into()));
        }
        if list.windows(2).any(|e| e[1] >= e[0]) {
            return Err(Error::Usage("eps list must be strictly decreasing".into()));
        }
        Ok(list)
    }

    fn check(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Usage(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if self.nodes < 8 {
            return Err(Error::Usage(format!("need at least 8 nodes, got {}", self.nodes)));
        }
        Ok(())
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MinimizeCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Relative amplitude of the random perturbation of the initial field.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long = "max-iters", default_value_t = 2_000_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// CSV snapshot of the final field.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[command(flatten)]
    pub string: StringArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RecoveryCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 4096)]
    pub nodes: usize,
    /// Comma-separated, decreasing.
    #[arg(long, default_value = "0.02,0.01,0.005")]
    pub eps: String,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub gamma: f64,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[command(flatten)]
    pub string: StringArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct YoungCmd {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub n: f64,
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
    /// Tensions given directly instead of computed from the model.
    #[arg(long = "g-ab")]
    pub g_ab: Option<f64>,
    #[arg(long = "g-0a")]
    pub g_0a: Option<f64>,
    #[arg(long = "g-0b")]
    pub g_0b: Option<f64>,
    /// Run a 2D flow and measure the angle.
    #[arg(long)]
    pub measure: bool,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.06)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[command(flatten)]
    pub string: StringArgs,
    #[command(flatten)]
    pub common: Common,
}

/// Turn the lines of a key=value file into `--key value` arguments.
pub fn config_args(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        let val = v.trim();
        match val {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(val.to_string());
            }
        }
    }
    Ok(out)
}

/// Insert the entries of `--config FILE` right after the subcommand so that
/// later command-line flags override them.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let pos = args.iter().position(|a| a == "--config").map(|i| (i, args.get(i + 1).cloned()));
    let pos = pos.or_else(|| {
        args.iter()
            .position(|a| a.starts_with("--config="))
            .map(|i| (i, Some(args[i]["--config=".len()..].to_string())))
    });
    let Some((_, Some(path))) = pos else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let extra = config_args(&text)?;
    let mut out = Vec::with_capacity(args.len() + extra.len());
    let mut it = args.into_iter();
    out.extend(it.by_ref().take(2));
    out.extend(extra);
    out.extend(it);
    Ok(out)
}

/// Parse arguments; `Ok(Err(text))` carries help or version output.
fn parse_or_help(args: Vec<String>) -> Result<std::result::Result<Cli, String>> {
    let args = expand_config(args)?;
    match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Ok(cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Ok(Err(e.to_string())),
            _ => Err(Error::Usage(e.render().to_string())),
        },
    }
}

pub fn parse(args: Vec<String>) -> Result<Cli> {
    parse_or_help(args)?.map_err(Error::Usage)
}

/// `x` with `digits` significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim(mant), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

/// `lo:hi:points`, evenly spaced and inclusive.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Usage(format!("range '{s}' must be lo:hi:points"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if k == 0 || !lo.is_finite() || !hi.is_finite() || (k > 1 && hi < lo) {
        return Err(bad());
    }
    if k == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..k).map(|i| if i + 1 == k { hi } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect())
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(t) = flag {
        return if t == 0 { Err(Error::Usage("threads must be at least 1".into())) } else { Ok(Some(t)) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Parse and execute; the returned text is meant for stdout.
pub fn run(args: Vec<String>) -> Result<String> {
    let cli = match parse_or_help(args)? {
        Ok(cli) => cli,
        Err(text) => return Ok(text),
    };
    let common = match &cli.command {
        Command::Classify(c) | Command::TfState(c) => &c.common,
        Command::PhaseDiagram(c) => &c.common,
        Command::Geodesic(c) | Command::Profile(c) => &c.common,
        Command::Minimize(c) => &c.common,
        Command::RecoveryCheck(c) => &c.common,
        Command::Young(c) => &c.common,
    }
    .clone();
    let threads = thread_count(common.threads)?;
    let start = Instant::now();
    let mut text = with_pool(threads, || execute(&cli.command))??;
    if common.timings {
        if let Ok(mut v) = serde_json::from_str::<Value>(&text) {
            v["elapsed_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
            text = format!("{}\n", serde_json::to_string_pretty(&v).expect("json"));
        }
    }
    match &common.out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn envelope(command: &str, config: &impl Serialize, body: Value) -> String {
    let mut v = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
}

fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Classify(c) => cmd_classify(c),
        Command::TfState(c) => cmd_tf_state(c),
        Command::PhaseDiagram(c) => cmd_phase_diagram(c),
        Command::Geodesic(c) => cmd_geodesic(c),
        Command::Profile(c) => cmd_profile(c),
        Command::Minimize(c) => cmd_minimize(c),
        Command::RecoveryCheck(c) => cmd_recovery(c),
        Command::Young(c) => cmd_young(c),
    }
}

fn critical(params: &ModelParams) -> (Option<f64>, Option<f64>) {
    (critical_q1(params).ok(), critical_q2(params).ok())
}

pub fn cmd_classify(c: &ModelCmd) -> Result<String> {
    let p = c.model.params()?;
    let regime = classify(&p);
    let (q1, q2) = critical(&p);
    let body = match solve(&p) {
        Ok(s) => json!({
            "regime": regime,
            "q1": q1,
            "q2": q2,
            "state_a": s.state_a,
            "state_b": s.state_b,
            "r": s.r,
            "e0": s.e0,
        }),
        Err(e @ Error::DegenerateRegime(_)) => json!({
            "regime": regime,
            "q1": q1,
            "q2": q2,
            "state_a": null,
            "state_b": null,
            "r": null,
            "e0": null,
            "degenerate": e.to_string(),
        }),
        Err(e) => return Err(e),
    };
    Ok(envelope("classify", c, body))
}

pub fn cmd_tf_state(c: &ModelCmd) -> Result<String> {
    let p = c.model.params()?;
    let s = solve(&p)?;
    let (q1, q2) = critical(&p);
    let body = json!({
        "regime": s.regime,
        "q1": q1,
        "q2": q2,
        "solution": s,
        "mass_residual": s.mass_residual(&p),
        "magnetization_residual": s.magnetization_residual(&p),
    });
    Ok(envelope("tf-state", c, body))
}

#[derive(Debug, Clone)]
struct Cell {
    q: f64,
    m: f64,
    regime: String,
    q1: f64,
    q2: f64,
    r: f64,
    e0: f64,
}

fn phase_cell(alpha: f64, n: f64, q: f64, m: f64) -> Result<Cell> {
    let p = ModelParams::new(alpha, q, n, m)?;
    let (q1, q2) = critical(&p);
    let (regime, r, e0) = match solve(&p) {
        Ok(s) => (s.regime.as_str().to_string(), s.r, s.e0),
        Err(Error::DegenerateRegime(_)) => ("DEGENERATE".to_string(), f64::NAN, f64::NAN),
        Err(e) => return Err(e),
    };
    Ok(Cell { q, m, regime, q1: q1.unwrap_or(f64::NAN), q2: q2.unwrap_or(f64::NAN), r, e0 })
}

pub fn cmd_phase_diagram(c: &PhaseCmd) -> Result<String> {
    let qs = parse_range(&c.q_range)?;
    let ms = parse_range(&c.m_range)?;
    // validate once per m so that bad input fails before the sweep
    for &m in &ms {
        ModelParams::new(c.alpha, qs[0], c.n, m)?;
    }
    let jobs: Vec<(f64, f64)> = ms.iter().flat_map(|&m| qs.iter().map(move |&q| (q, m))).collect();
    let cells: Vec<Cell> = jobs.par_iter().map(|&(q, m)| phase_cell(c.alpha, c.n, q, m)).collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("q,m,regime,q1,q2,r,e0\n");
    for cell in &cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_sig(cell.q, 12),
            fmt_sig(cell.m, 12),
            cell.regime,
            fmt_sig(cell.q1, 12),
            fmt_sig(cell.q2, 12),
            fmt_sig(cell.r, 12),
            fmt_sig(cell.e0, 12)
        );
    }
    let _ = writeln!(csv, "# config: {}", serde_json::to_string(c).expect("json"));
    if let Some(path) = &c.svg {
        write_file(path, &phase_svg(&cells, qs.len(), ms.len(), c))?;
    }
    Ok(csv)
}

fn regime_color(tag: &str) -> &'static str {
    match tag {
        "NS_MS" => "#4e79a7",
        "NS_2C" => "#f28e2b",
        "PURE_2C" => "#59a14f",
        "MS_MS" => "#e15759",
        "PURE_3C" => "#b07aa1",
        "FERRO_Q0_DEGENERATE" => "#9c755f",
        "ALPHA0_Q0" => "#bab0ac",
        "ALPHA0_QPOS" => "#76b7b2",
        "ALPHA0_QNEG" => "#edc948",
        _ => "#000000",
    }
}

fn phase_svg(cells: &[Cell], nq: usize, nm: usize, c: &PhaseCmd) -> String {
    let px = (600 / nq.max(1)).clamp(2, 40);
    let (w, h) = (px * nq, px * nm);
    let legend_w = 200;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" shape-rendering=\"crispEdges\">",
        w + legend_w,
        h.max(20 * (Regime::ALL.len() + 2))
    );
    let _ = writeln!(s, "<title>alpha={} n={} q={} m={}</title>", c.alpha, c.n, c.q_range, c.m_range);
    for (k, cell) in cells.iter().enumerate() {
        let (i, j) = (k % nq, k / nq);
        // m increases upward
        let y = (nm - 1 - j) * px;
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{px}\" height=\"{px}\" fill=\"{}\"/>",
            i * px,
            y,
            regime_color(&cell.regime)
        );
    }
    let tags: Vec<&str> = Regime::ALL.iter().map(|r| r.as_str()).chain(std::iter::once("DEGENERATE")).collect();
    for (k, tag) in tags.iter().enumerate() {
        let y = 10 + 20 * k;
        let _ =
            writeln!(s, "<rect x=\"{}\" y=\"{y}\" width=\"14\" height=\"14\" fill=\"{}\"/>", w + 10, regime_color(tag));
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{tag}</text>",
            w + 30,
            y + 12
        );
    }
    s.push_str("</svg>\n");
    s
}

fn potential(model: &ModelArgs) -> Result<(ModelParams, PotentialW)> {
    let p = model.params()?;
    let s = solve(&p)?;
    let w = build_w(&p, &s)?;
    Ok((p, w))
}

fn endpoints(w: &PotentialW, pair: &str) -> Result<(SpinState, SpinState)> {
    let need_b = || w.state_b.ok_or_else(|| Error::Usage(format!("regime {} has a single well", w.regime)));
    match pair {
        "ab" => Ok((w.state_a, need_b()?)),
        "0a" => Ok((SpinState::ZERO, w.state_a)),
        "0b" => Ok((SpinState::ZERO, need_b()?)),
        other => Err(Error::Usage(format!("pair must be ab, 0a or 0b, got '{other}'"))),
    }
}

fn points_csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| fmt_sig(*x, 12)).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

pub fn cmd_geodesic(c: &GeodesicCmd) -> Result<String> {
    let (_, w) = potential(&c.model)?;
    let (x0, x1) = endpoints(&w, &c.pair)?;
    let path = crate::geodesic::geodesic_cost(&w, x0, x1, &c.string.options())?;
    let oracle = (c.oracle > 0).then(|| graph_oracle_cost(&w, x0, x1, c.oracle));
    if let Some(csv) = &c.csv {
        let rows = path.samples.iter().map(|s| s.to_array().to_vec());
        write_file(csv, &points_csv("u1,u0,um1", rows))?;
    }
    let body = json!({
        "regime": w.regime,
        "from": x0,
        "to": x1,
        "cost": path.cost,
        "oracle_cost": oracle,
        "oracle_rel_diff": oracle.map(|o| (o - path.cost) / path.cost),
        "length": path.length(),
        "delta_used": path.delta_used,
        "delta_costs": path.delta_costs,
        "candidate_costs": path.candidate_costs,
        "multiple_geodesics": path.multiple_geodesics,
    });
    Ok(envelope("geodesic", c, body))
}

fn profile_json(p: &LayerProfile) -> Value {
    let (t0, t1) = p.t_range();
    json!({
        "energy": p.energy,
        "decay_rate": p.decay_rate,
        "decay_r2": p.decay_r2,
        "equipartition_residual": p.equipartition_residual,
        "t_range": [t0, t1],
        "samples": p.t_grid.len(),
    })
}

pub fn cmd_profile(c: &GeodesicCmd) -> Result<String> {
    let (_, w) = potential(&c.model)?;
    let (x0, x1) = endpoints(&w, &c.pair)?;
    let path = crate::geodesic::geodesic_cost(&w, x0, x1, &c.string.options())?;
    let opts = ProfileOptions::default();
    let prof = if c.pair == "ab" {
        internal_profile_with(&w, &path, &opts)?
    } else {
        boundary_profile_with(&w, &path, &opts)?
    };
    if let Some(csv) = &c.csv {
        let rows = prof.t_grid.iter().zip(&prof.values).map(|(t, v)| vec![*t, v.u1, v.u0, v.um1]);
        write_file(csv, &points_csv("t,u1,u0,um1", rows))?;
    }
    let mut body = json!({
        "regime": w.regime,
        "from": x0,
        "to": x1,
        "geodesic_cost": path.cost,
        "energy_over_2g": prof.energy / (2.0 * path.cost),
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut body, profile_json(&prof)) {
        dst.extend(src);
    }
    Ok(envelope("profile", c, body))
}

/// Sharp configuration the flow starts from and its G₀.
fn sharp_start(w: &PotentialW, t: &Tensions, dim: u8, nodes: usize) -> Result<(SharpConfig, f64)> {
    let a = w.state_a;
    match (w.state_b, t.g_ab, t.g_0b) {
        (Some(b), Some(gab), Some(g0b)) if w.r > 0.0 && w.r < 1.0 => {
            if dim == 1 {
                let (cfg, br) = optimal_1d_config(w.r, gab, t.g_0a, g0b, a, b)?;
                Ok((cfg, br.total))
            } else {
                let cfg = SharpConfig::bitmap_from_fn(nodes, |x, _| x < w.r, a, b)?;
                let g0 = g0_energy(&cfg, gab, t.g_0a, g0b).total;
                Ok((cfg, g0))
            }
        }
        _ => {
            let cfg = if dim == 1 {
                SharpConfig::line(Vec::new(), true, a, a)?
            } else {
                SharpConfig::bitmap_from_fn(nodes, |_, _| true, a, a)?
            };
            let g0 = g0_energy(&cfg, 0.0, t.g_0a, t.g_0a).total;
            Ok((cfg, g0))
        }
    }
}

pub fn cmd_minimize(c: &MinimizeCmd) -> Result<String> {
    c.grid.check()?;
    let eps = c.grid.eps_list()?;
    let (_, w) = potential(&c.model)?;
    let paths = surface_tensions(&w, &c.string.options())?;
    let t = paths.tensions();
    let (cfg, g0) = sharp_start(&w, &t, c.grid.dim, c.grid.nodes)?;
    let init = initial_field(&cfg, &w, c.grid.nodes, eps[0], c.noise, c.seed_value())?;
    let opts = FlowOptions { max_iters: c.max_iters, tol: c.tol, ..Default::default() };
    let (field, rows) = continuation_in_eps(&init, &w, &eps, g0, &opts)?;
    if let Some(path) = &c.snapshot {
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let body = json!({
        "regime": w.regime,
        "tensions": t,
        "g0": g0,
        "h": field.h,
        "runs": rows,
        "final_mass": field.mass(),
        "final_magnetization": field.magnetization(),
    });
    Ok(envelope("minimize", c, body))
}

impl MinimizeCmd {
    fn seed_value(&self) -> u64 {
        self.common.seed
    }
}

fn recovery_profiles(
    w: &PotentialW,
    paths: &TensionPaths,
) -> Result<(Option<LayerProfile>, LayerProfile, Option<LayerProfile>)> {
    let opts = ProfileOptions::default();
    let internal = paths.ab.as_ref().map(|p| internal_profile_with(w, p, &opts)).transpose()?;
    let ba = boundary_profile_with(w, &paths.zero_a, &opts)?;
    let bb = paths.zero_b.as_ref().map(|p| boundary_profile_with(w, p, &opts)).transpose()?;
    Ok((internal, ba, bb))
}

pub fn cmd_recovery(c: &RecoveryCmd) -> Result<String> {
    let eps = GridArgs { dim: 1, nodes: c.nodes, eps: c.eps.clone() }.eps_list()?;
    let (_, w) = potential(&c.model)?;
    let paths = surface_tensions(&w, &c.string.options())?;
    let t = paths.tensions();
    let (cfg, g0) = sharp_start(&w, &t, 1, c.nodes)?;
    let (internal, ba, bb) = recovery_profiles(&w, &paths)?;
    let profiles = RecoveryProfiles { internal: internal.as_ref(), boundary_a: &ba, boundary_b: bb.as_ref() };
    let opts = RecoveryOptions { gamma: c.gamma, ..Default::default() };
    let runs: Vec<_> = eps
        .par_iter()
        .map(|&e| build_recovery_sequence(&cfg, &w, profiles, e, c.nodes, &opts))
        .collect::<Result<Vec<_>>>()?;
    if let (Some(path), Some((field, _))) = (&c.snapshot, runs.last()) {
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let rows: Vec<Value> = runs
        .iter()
        .map(|(_, r)| {
            let mut v = serde_json::to_value(r).expect("json");
            v["gap_rel"] = json!((r.energy - g0) / g0);
            v
        })
        .collect();
    let last_gap = rows.last().map(|r| r["gap_rel"].clone()).unwrap_or(Value::Null);
    let body = json!({
        "regime": w.regime,
        "tensions": t,
        "g0": g0,
        "gap_rel": last_gap,
        "runs": rows,
    });
    Ok(envelope("recovery-check", c, body))
}

pub fn cmd_young(c: &YoungCmd) -> Result<String> {
    let model = match (c.alpha, c.q) {
        (Some(alpha), Some(q)) => Some(ModelArgs { alpha, q, n: c.n, m: c.m }),
        (None, None) => None,
        _ => return Err(Error::Usage("give both --alpha and --q, or neither".into())),
    };
    let mut measured = Value::Null;
    let (g_ab, g_0a, g_0b) = match (c.g_ab, c.g_0a, c.g_0b, &model) {
        (Some(ab), Some(a0), Some(b0), _) => (ab, a0, b0),
        (None, None, None, Some(mdl)) => {
            let (_, w) = potential(mdl)?;
            let paths = surface_tensions(&w, &c.string.options())?;
            let t = paths.tensions();
            let (Some(ab), Some(b0)) = (t.g_ab, t.g_0b) else {
                return Err(Error::Usage(format!("regime {} has no interface", w.regime)));
            };
            if c.measure {
                let (cfg, _) = sharp_start(&w, &t, 2, c.nodes)?;
                let init = initial_field(&cfg, &w, c.nodes, c.eps, c.noise, c.common.seed)?;
                let (field, rep) = crate::relaxation::minimize_geps(&init, &w, c.eps, &FlowOptions::default())?;
                let angle = measure_contact_angle(&field, w.state_a, w.state_b.expect("two wells"), c.eps)?;
                measured = json!({
                    "theta_deg": angle.theta.to_degrees(),
                    "contacts": angle.contacts.iter().map(|p| json!({"point": p.point, "theta_deg": p.theta.to_degrees()})).collect::<Vec<_>>(),
                    "curvature_mean_abs": angle.curvature_mean_abs,
                    "curvature_variance": angle.curvature_variance,
                    "flow_energy": rep.final_energy,
                    "flow_converged": rep.converged,
                });
            }
            (ab, t.g_0a, b0)
        }
        _ => return Err(Error::Usage("give all of --g-ab --g-0a --g-0b, or the model parameters".into())),
    };
    if g_ab < 0.0 || g_0a < 0.0 || g_0b < 0.0 {
        return Err(Error::Usage("surface tensions must be nonnegative".into()));
    }
    let theta = young_angle(g_ab, g_0a, g_0b)?;
    let body = json!({
        "theta_deg": theta.to_degrees(),
        "theta": theta,
        "g_ab": g_ab,
        "g_0a": g_0a,
        "g_0b": g_0b,
        "balance_residual": g_ab * theta.cos() + g_0a - g_0b,
        "measured": measured,
    });
    Ok(envelope("young", c, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("spinor-tf".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.1, 12), "0.1");
        assert_eq!(fmt_sig(-0.3, 12), "-0.3");
        assert_eq!(fmt_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0 * 1e-7, 12), "6.66666666667e-8");
        assert_eq!(fmt_sig(9.9999999999999, 12), "10");
        assert_eq!(fmt_sig(123456.0, 12), "123456");
        assert_eq!(fmt_sig(f64::NAN, 12), "NaN");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("-0.2:0.2:1").unwrap(), vec![-0.2]);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("1:0:3").is_err());
    }

    #[test]
    fn config_lines() {
        let a = config_args("# comment\nalpha = 0.8\nq=0.1\n\ntimings=true\nsvg_out=false\n").unwrap();
        assert_eq!(a, vec!["--alpha", "0.8", "--q", "0.1", "--timings"]);
        assert!(config_args("alpha 0.8").is_err());
    }

    #[test]
    fn negative_ranges() {
        let out = run(args("phase-diagram --alpha 0.8 --q-range -0.2:-0.1:2 --m-range 0:0:1")).unwrap();
        assert!(out.lines().nth(1).unwrap().starts_with("-0.2,0,"));
    }

    #[test]
    fn negative_values_and_overrides() {
        let cli = parse(args("classify --alpha -0.5 --q -0.3 --q -0.1")).unwrap();
        match cli.command {
            Command::Classify(c) => {
                assert_eq!(c.model.alpha, -0.5);
                assert_eq!(c.model.q, -0.1);
            }
            _ => panic!(),
        }
        assert!(matches!(parse(args("classify --alpha 1")), Err(Error::Usage(_))));
    }

    #[test]
    fn classify_examples() {
        let out = run(args("classify --alpha 0.8 --q 0.1 --n 1 --m 0.2")).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["regime"], "NS_2C");
        let out = run(args("classify --alpha -0.5 --q -0.3 --n 1 --m 0")).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["regime"], "MS_MS");
        assert_eq!(v["r"], 0.5);
        let out = run(args("classify --alpha 0 --q 0.5 --n 1 --m 0.2")).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["regime"], "ALPHA0_QPOS");
        assert_eq!(v["config"]["model"]["alpha"], 0.0);
        assert_eq!(run(args("classify --alpha 1 --q 0 --n 1 --m 2")).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn young_direct() {
        let out = run(args("young --g-ab 1 --g-0a 0.3 --g-0b 0.3")).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["theta_deg"], 90.0);
        let e = run(args("young --g-ab 1 --g-0a 0 --g-0b 2")).unwrap_err();
        assert!(matches!(e, Error::NoEquilibrium(_)));
        assert_eq!(e.exit_code(), 3);
    }
}
