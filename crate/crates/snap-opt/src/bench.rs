//! Benchmark harness: named experiment presets, a deterministic
//! algorithm-by-seed grid runner with trace CSVs and SVG figures, and the
//! invariant suite behind the `verify` subcommand.
//!
//! Experiment specs are plain `key = value` text files (see
//! `presets/*.spec` in the repository root); every random draw flows
//! through the cell seed, so a rerun of the same spec reproduces every
//! trace byte-for-byte when the canonical flag is set.

use crate::eigen::SpGdConfig;
use crate::linesearch::StepFlag;
use crate::oracle::{self, make_problem, ProblemInstance, ProblemKind};
use crate::solver::{
    solve, summary_block, trace_to_csv, OracleKind, SolveResult, SolverConfig, StepKind, Variant,
    TRACE_CSV_HEADER,
};
use crate::{Error, Result, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Pgd,
    PgdLs,
    Snap,
    SnapPlus,
    SnapSimplified,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Pgd => "pgd",
            Algo::PgdLs => "pgd-ls",
            Algo::Snap => "snap",
            Algo::SnapPlus => "snap-plus",
            Algo::SnapSimplified => "snap-simplified",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "pgd" => Algo::Pgd,
            "pgd-ls" => Algo::PgdLs,
            "snap" => Algo::Snap,
            "snap-plus" => Algo::SnapPlus,
            "snap-simplified" => Algo::SnapSimplified,
            other => return Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        })
    }

    pub fn variant_oracle(&self) -> (Variant, OracleKind) {
        match self {
            Algo::Pgd => (Variant::Pgd, OracleKind::Hessian),
            Algo::PgdLs => (Variant::PgdLs, OracleKind::Hessian),
            Algo::Snap => (Variant::Snap, OracleKind::Hessian),
            Algo::SnapPlus => (Variant::Snap, OracleKind::SpGd),
            Algo::SnapSimplified => (Variant::SnapSimplified, OracleKind::Hessian),
        }
    }
}

/// A resolved experiment: preset name, grid, and config overrides.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub preset: String,
    pub seeds: Vec<u64>,
    pub algos: Vec<Algo>,
    /// Initialization scale `c`: the start point is `proj(c * gaussian)`.
    pub init_scale: f64,
    /// Scale of the random linear perturbation; zero disables it.
    pub q_scale: f64,
    pub max_iter: Option<usize>,
    pub no_stop: Option<bool>,
    /// Zero the wall-clock column in emitted CSVs so reruns byte-compare.
    pub canonical: bool,
    pub out_dir: Option<PathBuf>,
    /// `(algo scope, key, value)` applied to the solver config; `None`
    /// scope applies to every algorithm.
    pub overrides: Vec<(Option<Algo>, String, String)>,
}

pub fn preset_names() -> &'static [&'static str] {
    &["example1", "nmf-small", "nn-small", "simplex-small", "pnmf-small"]
}

/// Build the preset's problem for one seed.
pub fn preset_problem(name: &str, seed: u64) -> Result<ProblemInstance> {
    match name {
        "example1" => Ok(oracle::example1()),
        "nmf-small" => {
            make_problem(ProblemKind::Nmf { n: 50, m: 20, k: 10, factor_zero_frac: 0.05 }, seed)
        }
        "nn-small" => make_problem(
            ProblemKind::TwoLayerNn { samples: 100, features: 50, outputs: 10, hidden: 15 },
            seed,
        ),
        "simplex-small" => make_problem(ProblemKind::SymNmfSimplex { n: 100, k: 5 }, seed),
        "pnmf-small" => {
            make_problem(ProblemKind::PenalizedNmf { n: 40, m: 100, k: 5, rho: 0.1 }, seed)
        }
        other => Err(Error::UnknownPreset(other.into())),
    }
}

/// Default experiment grid for a preset.
pub fn preset_spec(name: &str) -> Result<ExperimentSpec> {
    let spec = match name {
        "example1" => ExperimentSpec {
            preset: name.into(),
            seeds: vec![1],
            algos: vec![Algo::Pgd, Algo::Snap, Algo::SnapPlus],
            init_scale: 0.0,
            q_scale: 0.0,
            max_iter: None,
            no_stop: None,
            canonical: true,
            out_dir: None,
            // the first-order baseline runs with stopping removed, so the
            // trace shows it parked at the saddle while the SNAP variants
            // certify it
            overrides: vec![(Some(Algo::Pgd), "no_stop".into(), "true".into())],
        },
        "nmf-small" => ExperimentSpec {
            preset: name.into(),
            seeds: vec![1, 2, 3, 4, 5],
            algos: vec![Algo::Pgd, Algo::PgdLs, Algo::Snap, Algo::SnapPlus],
            init_scale: 1e-10,
            q_scale: 0.0,
            max_iter: None,
            no_stop: None,
            canonical: true,
            out_dir: None,
            overrides: Vec::new(),
        },
        "nn-small" | "simplex-small" | "pnmf-small" => ExperimentSpec {
            preset: name.into(),
            seeds: vec![1, 2],
            algos: vec![Algo::Pgd, Algo::PgdLs, Algo::SnapPlus],
            init_scale: if name == "nn-small" { 1.0 } else { 1e-10 },
            q_scale: 0.0,
            max_iter: None,
            no_stop: None,
            canonical: true,
            out_dir: None,
            overrides: Vec::new(),
        },
        other => return Err(Error::UnknownPreset(other.into())),
    };
    Ok(spec)
}

/// Per-preset solver configuration for one algorithm. The step sizes and
/// SP-GD constants follow the experiment setups at desk scale.
pub fn preset_config(name: &str, algo: Algo) -> Result<SolverConfig> {
    let (variant, oracle_kind) = algo.variant_oracle();
    let mut cfg = SolverConfig { variant, oracle: oracle_kind, ..SolverConfig::default() };
    match name {
        "example1" => {
            cfg.eps_g = 1e-6;
            cfg.eps_h = 1e-3;
            cfg.alpha_pi = Some(0.25);
            cfg.r_th = 0;
            cfg.max_iter = 300;
            cfg.spgd = Some(SpGdConfig::practical(60, 1e-4, 1e-9, 0.25, cfg.eps_h, cfg.delta));
        }
        "nmf-small" => {
            // The gradient-difference variant keeps its oracle gate above
            // the tail proximal-gradient levels so the curvature cascade
            // carries through every plateau; the Hessian variant consults
            // only at near-stationary dips.
            cfg.eps_g = if algo == Algo::SnapPlus { 1.0 } else { 1e-2 };
            cfg.eps_h = 1e-4;
            cfg.alpha_pi = Some(7e-4);
            cfg.r_th = 300;
            cfg.max_iter = 20_000;
            cfg.no_stop = true;
            // saddle-initialization scale is 1e-10; the default activity
            // tolerance of 1e-9 would mark the whole start point active
            cfg.active_tol = 1e-13;
            cfg.spgd = Some(SpGdConfig::practical(8000, 1e-4, 1e-12, 3e-3, cfg.eps_h, cfg.delta));
        }
        "nn-small" => {
            cfg.eps_g = 1e-2;
            cfg.eps_h = 1e-3;
            cfg.alpha_pi = Some(1e-3);
            cfg.r_th = 50;
            cfg.max_iter = 20_000;
            cfg.spgd = Some(SpGdConfig::practical(50, 1e-4, 1e-9, 1e-3, cfg.eps_h, cfg.delta));
        }
        "simplex-small" => {
            cfg.eps_g = 1e-3;
            cfg.eps_h = 1e-3;
            cfg.alpha_pi = Some(1e-2);
            cfg.r_th = 100;
            cfg.max_iter = 20_000;
            cfg.no_stop = true;
            cfg.active_tol = 1e-13;
            cfg.spgd = Some(SpGdConfig::practical(100, 1e-4, 1e-9, 1e-2, cfg.eps_h, cfg.delta));
        }
        "pnmf-small" => {
            cfg.eps_g = 1e-3;
            cfg.eps_h = 1e-3;
            cfg.alpha_pi = Some(1e-3);
            cfg.r_th = 20;
            cfg.max_iter = 20_000;
            cfg.no_stop = true;
            cfg.active_tol = 1e-13;
            cfg.spgd = Some(SpGdConfig::practical(100, 1e-4, 1e-9, 1e-3, cfg.eps_h, cfg.delta));
        }
        other => return Err(Error::UnknownPreset(other.into())),
    }
    Ok(cfg)
}

/// Start point `proj(c * gaussian)`, drawn from a seed-derived stream
/// separate from the solver's.
pub fn init_point(problem: &ProblemInstance, c: f64, seed: u64) -> Result<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(0x5151));
    let raw = Vector::from_fn(problem.dim(), |_, _| StandardNormal.sample(&mut rng));
    problem.feasible.project(&(c * raw), crate::poly::PROJ_TOL)
}

fn perturb_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x2545F4914F6CDD1D).wrapping_add(0xABCD)
}

/// One executed grid cell with everything the checks need.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub problem: ProblemInstance,
    pub cfg: SolverConfig,
    pub result: SolveResult,
}

/// Build problem + config + start point and run one grid cell.
pub fn run_cell(spec: &ExperimentSpec, algo: Algo, seed: u64) -> Result<CellRun> {
    let mut problem = preset_problem(&spec.preset, seed)?;
    if spec.q_scale > 0.0 {
        problem = oracle::perturb_linear(&problem, spec.q_scale, perturb_seed(seed))?;
    }
    let mut cfg = preset_config(&spec.preset, algo)?;
    cfg.seed = seed;
    if let Some(mi) = spec.max_iter {
        cfg.max_iter = mi;
    }
    if let Some(ns) = spec.no_stop {
        cfg.no_stop = ns;
    }
    for (scope, key, value) in &spec.overrides {
        if scope.is_none() || *scope == Some(algo) {
            apply_override(&mut cfg, key, value)?;
        }
    }
    let x1 = init_point(&problem, spec.init_scale, seed)?;
    let result = solve(&problem, &x1, &cfg)?;
    Ok(CellRun { problem, cfg, result })
}

/// Apply one `key = value` override to a solver config.
pub fn apply_override(cfg: &mut SolverConfig, key: &str, value: &str) -> Result<()> {
    let bad = |k: &str, v: &str| Error::Parse(format!("bad value `{v}` for `{k}`"));
    fn spgd(cfg: &mut SolverConfig) -> &mut SpGdConfig {
        if cfg.spgd.is_none() {
            cfg.spgd = Some(SpGdConfig::practical(100, 1e-4, 1e-9, 1e-2, cfg.eps_h, cfg.delta));
        }
        cfg.spgd.as_mut().unwrap()
    }
    match key {
        "eps_g" => cfg.eps_g = value.parse().map_err(|_| bad(key, value))?,
        "eps_h" => {
            cfg.eps_h = value.parse().map_err(|_| bad(key, value))?;
            if let Some(s) = cfg.spgd.as_mut() {
                s.eps_h = cfg.eps_h;
            }
        }
        "alpha_pi" => cfg.alpha_pi = Some(value.parse().map_err(|_| bad(key, value))?),
        "delta" => cfg.delta = value.parse().map_err(|_| bad(key, value))?,
        "r_th" => cfg.r_th = value.parse().map_err(|_| bad(key, value))?,
        "max_iter" => cfg.max_iter = value.parse().map_err(|_| bad(key, value))?,
        "no_stop" => cfg.no_stop = value.parse().map_err(|_| bad(key, value))?,
        "oracle" => cfg.oracle = OracleKind::parse(value)?,
        "beta" => spgd(cfg).beta = value.parse().map_err(|_| bad(key, value))?,
        "spgd_t" => spgd(cfg).t = value.parse().map_err(|_| bad(key, value))?,
        "spgd_r" => spgd(cfg).script_r = value.parse().map_err(|_| bad(key, value))?,
        "spgd_f" => spgd(cfg).script_f = value.parse().map_err(|_| bad(key, value))?,
        other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
    }
    Ok(())
}

/// Parse an experiment spec file (`key = value` lines, `#` comments,
/// `algo.key = value` for per-algorithm overrides).
pub fn parse_spec_str(text: &str) -> Result<ExperimentSpec> {
    let mut preset: Option<String> = None;
    let mut seeds: Option<Vec<u64>> = None;
    let mut algos: Option<Vec<Algo>> = None;
    let mut init_scale: Option<f64> = None;
    let mut spec = ExperimentSpec {
        preset: String::new(),
        seeds: Vec::new(),
        algos: Vec::new(),
        init_scale: 1.0,
        q_scale: 0.0,
        max_iter: None,
        no_stop: None,
        canonical: true,
        out_dir: None,
        overrides: Vec::new(),
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "preset" => preset = Some(value.to_string()),
            "seeds" => {
                let parsed: Result<Vec<u64>> = value
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Parse(format!("bad seed `{t}`")))
                    })
                    .collect();
                let parsed = parsed?;
                if parsed.is_empty() {
                    return Err(Error::Parse("seeds must be nonempty".into()));
                }
                seeds = Some(parsed);
            }
            "algos" => {
                let parsed: Result<Vec<Algo>> = value.split(',').map(Algo::parse).collect();
                algos = Some(parsed?);
            }
            "init_scale" => {
                init_scale = Some(
                    value.parse().map_err(|_| Error::Parse(format!("bad init_scale `{value}`")))?,
                );
            }
            "q_scale" => {
                spec.q_scale =
                    value.parse().map_err(|_| Error::Parse(format!("bad q_scale `{value}`")))?;
            }
            "max_iter" => {
                spec.max_iter = Some(
                    value.parse().map_err(|_| Error::Parse(format!("bad max_iter `{value}`")))?,
                );
            }
            "no_stop" => {
                spec.no_stop = Some(
                    value.parse().map_err(|_| Error::Parse(format!("bad no_stop `{value}`")))?,
                );
            }
            "canonical" => {
                spec.canonical =
                    value.parse().map_err(|_| Error::Parse(format!("bad canonical `{value}`")))?;
            }
            "out_dir" => spec.out_dir = Some(PathBuf::from(value)),
            scoped => {
                if let Some((algo_str, subkey)) = scoped.split_once('.') {
                    let algo = Algo::parse(algo_str)?;
                    spec.overrides.push((Some(algo), subkey.trim().to_string(), value.to_string()));
                } else {
                    // validate eagerly against a scratch config
                    let mut scratch = SolverConfig::default();
                    apply_override(&mut scratch, scoped, value)?;
                    spec.overrides.push((None, scoped.to_string(), value.to_string()));
                }
            }
        }
    }
    spec.preset = preset.ok_or_else(|| Error::Parse("spec is missing `preset = ...`".into()))?;
    // unset grid fields fall back to the preset defaults
    let defaults = preset_spec(&spec.preset)?;
    spec.seeds = seeds.unwrap_or(defaults.seeds);
    spec.algos = algos.unwrap_or(defaults.algos);
    spec.init_scale = init_scale.unwrap_or(defaults.init_scale);
    Ok(spec)
}

pub fn parse_spec_file(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec_str(&text)
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub algo: Algo,
    pub seed: u64,
    pub status: String,
    pub final_f: f64,
    pub final_gap: f64,
    pub iters: usize,
    pub oracle_calls: usize,
    pub wall_time_s: f64,
    pub trace_path: PathBuf,
    /// Populated when the cell failed outright; the grid keeps going.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub out_dir: PathBuf,
    pub cells: Vec<CellResult>,
    pub summary_path: PathBuf,
    pub figures: Vec<PathBuf>,
}

fn resolve_out_dir(spec: &ExperimentSpec) -> PathBuf {
    if let Some(dir) = &spec.out_dir {
        return dir.clone();
    }
    let root = std::env::var("SNAP_OUT_ROOT").unwrap_or_else(|_| "runs".into());
    PathBuf::from(root).join(&spec.preset)
}

/// Run the full algorithm-by-seed grid, write traces, summary and figures.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunArtifact> {
    let out_dir = resolve_out_dir(spec);
    std::fs::create_dir_all(&out_dir)?;
    let grid: Vec<(Algo, u64)> = spec
        .algos
        .iter()
        .flat_map(|&a| spec.seeds.iter().map(move |&s| (a, s)))
        .collect();

    let cells: Vec<CellResult> = grid
        .par_iter()
        .map(|&(algo, seed)| {
            let trace_path = out_dir.join(format!("trace_{}_s{}.csv", algo.as_str(), seed));
            match run_cell(spec, algo, seed) {
                Ok(CellRun { result, .. }) => {
                    let csv = trace_to_csv(&result.trace, spec.canonical);
                    if let Err(e) = std::fs::write(&trace_path, csv) {
                        return CellResult {
                            algo,
                            seed,
                            status: "io-error".into(),
                            final_f: f64::NAN,
                            final_gap: f64::NAN,
                            iters: 0,
                            oracle_calls: 0,
                            wall_time_s: 0.0,
                            trace_path,
                            error: Some(e.to_string()),
                        };
                    }
                    let final_gap = result.trace.last().map_or(f64::NAN, |t| t.fosp1_gap);
                    CellResult {
                        algo,
                        seed,
                        status: result.status.as_str().into(),
                        final_f: result.f_final,
                        final_gap,
                        iters: result.iters,
                        oracle_calls: result.oracle_calls,
                        wall_time_s: if spec.canonical { 0.0 } else { result.wall_time_s },
                        trace_path,
                        error: None,
                    }
                }
                Err(e) => CellResult {
                    algo,
                    seed,
                    status: "error".into(),
                    final_f: f64::NAN,
                    final_gap: f64::NAN,
                    iters: 0,
                    oracle_calls: 0,
                    wall_time_s: 0.0,
                    trace_path,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let summary_path = out_dir.join("summary.csv");
    let mut summary =
        String::from("preset,algo,seed,status,final_f,final_gap,iters,oracle_calls,wall_time_s\n");
    for c in &cells {
        summary.push_str(&format!(
            "{},{},{},{},{:.12e},{:.12e},{},{},{:.3}\n",
            spec.preset,
            c.algo.as_str(),
            c.seed,
            c.status,
            c.final_f,
            c.final_gap,
            c.iters,
            c.oracle_calls,
            c.wall_time_s
        ));
    }
    std::fs::write(&summary_path, summary)?;

    let figures = emit_plots(&out_dir, &spec.preset, &cells)?;
    Ok(RunArtifact { out_dir, cells, summary_path, figures })
}

/// Parsed trace row (subset of the CSV columns used downstream).
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub elapsed_s: f64,
    pub f: f64,
    pub fosp1_gap: f64,
    pub step_kind: String,
}

pub fn parse_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty trace file".into()))?;
    if header != TRACE_CSV_HEADER {
        return Err(Error::Parse(format!("unexpected trace header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::Parse(format!("bad trace row `{line}`")));
        }
        rows.push(TraceRow {
            iter: cols[0].parse().map_err(|_| Error::Parse("bad iter".into()))?,
            elapsed_s: cols[1].parse().map_err(|_| Error::Parse("bad elapsed".into()))?,
            f: cols[2].parse().map_err(|_| Error::Parse("bad f".into()))?,
            fosp1_gap: cols[3].parse().map_err(|_| Error::Parse("bad gap".into()))?,
            step_kind: cols[4].to_string(),
        });
    }
    Ok(rows)
}

/// Emit the loss-versus-iteration and loss-versus-time panels as
/// self-contained SVG files. The loss axis is log-scaled when every value
/// is positive, linear otherwise (QP objectives can be negative).
pub fn emit_plots(out_dir: &Path, preset: &str, cells: &[CellResult]) -> Result<Vec<PathBuf>> {
    let mut series_iter: Vec<(String, usize, Vec<(f64, f64)>)> = Vec::new();
    let mut series_time: Vec<(String, usize, Vec<(f64, f64)>)> = Vec::new();
    let algo_index = |a: Algo| -> usize {
        [Algo::Pgd, Algo::PgdLs, Algo::Snap, Algo::SnapPlus, Algo::SnapSimplified]
            .iter()
            .position(|&b| b == a)
            .unwrap_or(0)
    };
    for c in cells {
        if c.error.is_some() {
            continue;
        }
        let rows = match parse_trace_csv(&c.trace_path) {
            Ok(r) if !r.is_empty() => r,
            _ => {
                eprintln!(
                    "warning: skipping empty or unreadable trace {}",
                    c.trace_path.display()
                );
                continue;
            }
        };
        let label = format!("{} (seed {})", c.algo.as_str(), c.seed);
        let by_iter: Vec<(f64, f64)> = rows.iter().map(|r| (r.iter as f64, r.f)).collect();
        let by_time: Vec<(f64, f64)> = rows.iter().map(|r| (r.elapsed_s, r.f)).collect();
        series_iter.push((label.clone(), algo_index(c.algo), by_iter));
        series_time.push((label, algo_index(c.algo), by_time));
    }
    if series_iter.is_empty() {
        eprintln!("warning: no plottable traces; skipping figures");
        return Ok(Vec::new());
    }
    let mut figures = Vec::new();
    let p1 = out_dir.join(format!("{preset}_loss_vs_iter.svg"));
    std::fs::write(&p1, render_panel(&format!("{preset}: loss vs iteration"), "iteration", &series_iter))?;
    figures.push(p1);
    let p2 = out_dir.join(format!("{preset}_loss_vs_time.svg"));
    std::fs::write(&p2, render_panel(&format!("{preset}: loss vs time"), "seconds", &series_time))?;
    figures.push(p2);
    Ok(figures)
}

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn render_panel(title: &str, x_label: &str, series: &[(String, usize, Vec<(f64, f64)>)]) -> String {
    let (w, h) = (860.0, 540.0);
    let (x0, x1, y0, y1) = (70.0, 830.0, 480.0, 40.0); // y grows upward on screen
    let log_floor = 1e-16;
    let log_y = series.iter().all(|(_, _, pts)| pts.iter().all(|&(_, y)| y > 0.0));
    let ty = |y: f64| -> f64 {
        if log_y {
            y.max(log_floor).log10()
        } else {
            y
        }
    };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, _, pts) in series {
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(ty(y));
            ymax = ymax.max(ty(y));
        }
    }
    if xmax <= xmin {
        xmax = xmin + 1.0;
    }
    if ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| x0 + (x - xmin) / (xmax - xmin) * (x1 - x0);
    let sy = |y: f64| y0 + (ty(y) - ymin) / (ymax - ymin) * (y1 - y0);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        title
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    // ticks
    for i in 0..=5 {
        let fx = xmin + (xmax - xmin) * i as f64 / 5.0;
        let px = sx(fx);
        svg.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            y0 + 18.0,
            format_tick(fx)
        ));
        let fy = ymin + (ymax - ymin) * i as f64 / 5.0;
        let py = y0 + (fy - ymin) / (ymax - ymin) * (y1 - y0);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        let label = if log_y { format!("1e{}", format_tick(fy)) } else { format_tick(fy) };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            x0 - 8.0,
            py + 4.0,
            label
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        h - 8.0,
        x_label
    ));
    let y_axis_label = if log_y { "loss (log scale)" } else { "loss" };
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        y_axis_label
    ));
    // series
    for (label, color_idx, pts) in series {
        let color = PALETTE[color_idx % PALETTE.len()];
        let stride = (pts.len() / 2000).max(1);
        let path: Vec<String> = pts
            .iter()
            .step_by(stride)
            .chain(pts.last().filter(|_| stride > 1))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"><title>{label}</title></polyline>\n",
            path.join(" ")
        ));
    }
    // legend: one entry per distinct label
    for (i, (label, color_idx, _)) in series.iter().enumerate() {
        let color = PALETTE[color_idx % PALETTE.len()];
        let ly = y1 + 14.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            x1 - 180.0,
            x1 - 150.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            x1 - 144.0,
            ly + 4.0,
            label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// One named check with its verdict and detail line.
#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(VerifyCheck { name: name.into(), passed, detail: detail.into() });
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "[{}] {} — {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        s.push_str(&format!(
            "{} of {} checks passed\n",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        ));
        s
    }
}

/// Invariant suite over every bench preset: monotone objective for the
/// monotone variants, feasibility of all iterates, oracle gating, boundary
/// streak bound, oracle direction contracts, and certified-output rechecks.
pub fn verify_presets(quick: bool) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for &name in preset_names() {
        let mut spec = preset_spec(name)?;
        if quick {
            spec.seeds.truncate(1);
            spec.max_iter = Some(spec.max_iter.unwrap_or(2000).min(2000));
        }
        let grid: Vec<(Algo, u64)> = spec
            .algos
            .iter()
            .flat_map(|&a| spec.seeds.iter().map(move |&s| (a, s)))
            .collect();
        let outcomes: Vec<(Algo, u64, Result<CellRun>)> = grid
            .par_iter()
            .map(|&(algo, seed)| (algo, seed, run_cell(&spec, algo, seed)))
            .collect();
        for (algo, seed, outcome) in outcomes {
            let tag = format!("{name}/{}/s{seed}", algo.as_str());
            let run = match outcome {
                Ok(run) => run,
                Err(e) => {
                    report.push(format!("{tag} run"), false, e.to_string());
                    continue;
                }
            };
            check_run(&mut report, &tag, algo, &run);
        }
    }
    Ok(report)
}

fn check_run(report: &mut VerifyReport, tag: &str, algo: Algo, run: &CellRun) {
    let CellRun { problem, cfg, result } = run;
    // monotone objective for the variants with a descent guarantee
    if matches!(algo, Algo::Pgd | Algo::Snap | Algo::SnapPlus | Algo::SnapSimplified) {
        let mut worst = 0.0f64;
        for w in result.trace.windows(2) {
            let rise = w[1].f - w[0].f;
            let allowed = 1e-12 * w[0].f.abs().max(1.0);
            if rise > allowed {
                worst = worst.max(rise);
            }
        }
        report.push(
            format!("{tag} monotone"),
            worst == 0.0,
            format!("worst objective rise {worst:.3e}"),
        );
    }
    report.push(
        format!("{tag} feasible"),
        result.worst_infeasibility <= 1e-8,
        format!("worst violation {:.3e}", result.worst_infeasibility),
    );
    if matches!(algo, Algo::Snap | Algo::SnapPlus | Algo::SnapSimplified) {
        // oracle gating: consultations only at gap <= eps_g, and for the
        // r_th-gated variants never within r_th iterations of a backtracked
        // NCD step.
        let mut gate_ok = true;
        let mut worst_gap = 0.0f64;
        let mut last_backtracked: Option<usize> = None;
        for t in &result.trace {
            if t.oracle_consulted {
                worst_gap = worst_gap.max(t.fosp1_gap);
                if t.fosp1_gap > cfg.eps_g * (1.0 + 1e-12) {
                    gate_ok = false;
                }
                if algo != Algo::SnapSimplified {
                    if let Some(rl) = last_backtracked {
                        if t.iter - rl < cfg.r_th {
                            gate_ok = false;
                        }
                    }
                }
            }
            if t.flag_alpha == Some(StepFlag::Backtracked)
                || (t.step == StepKind::OracleCall && t.alpha.is_some())
            {
                last_backtracked = Some(t.iter);
            }
        }
        report.push(
            format!("{tag} oracle-gate"),
            gate_ok,
            format!("max gap at consult {worst_gap:.3e} (eps_g {:.1e}, r_th {})", cfg.eps_g, cfg.r_th),
        );
        // boundary streak bound
        let cap = problem.dim().min(problem.feasible.num_constraints());
        let mut streak = 0usize;
        let mut max_streak = 0usize;
        for t in &result.trace {
            if t.step == StepKind::Boundary {
                streak += 1;
                max_streak = max_streak.max(streak);
            } else if matches!(t.step, StepKind::NcdGrad | StepKind::NcdCurv | StepKind::Pgd) {
                streak = 0;
            }
        }
        report.push(
            format!("{tag} boundary-streak"),
            max_streak <= cap,
            format!("longest streak {max_streak} vs min(d, m) = {cap}"),
        );
        report.push(
            format!("{tag} oracle-direction"),
            result.oracle_dir_norm_err <= 1e-10 && result.oracle_dir_free_err <= 1e-8,
            format!(
                "norm err {:.3e}, active component {:.3e}",
                result.oracle_dir_norm_err, result.oracle_dir_free_err
            ),
        );
        if let Some(ok) = result.certified_recheck {
            report.push(
                format!("{tag} certified-recheck"),
                ok,
                "independent check_sosp1 at the output",
            );
        }
    }
}

/// Convenience wrapper used by the CLI `solve` subcommand.
pub fn print_summary(problem: &ProblemInstance, result: &SolveResult) {
    print!("{}", summary_block(problem, result));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parser_round_trip() {
        let text = "\
# comment line
preset = example1
seeds = 3, 4
algos = pgd, snap-plus
init_scale = 1e-3
q_scale = 0.05
max_iter = 50
canonical = true
alpha_pi = 0.125
snap-plus.spgd_t = 25
";
        let spec = parse_spec_str(text).unwrap();
        assert_eq!(spec.preset, "example1");
        assert_eq!(spec.seeds, vec![3, 4]);
        assert_eq!(spec.algos, vec![Algo::Pgd, Algo::SnapPlus]);
        assert_eq!(spec.max_iter, Some(50));
        assert_eq!(spec.overrides.len(), 2);
        assert!(parse_spec_str("seeds = 1").is_err()); // no preset
        assert!(parse_spec_str("preset = example1\nbogus_key = 3").is_err());
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(preset_spec("nope"), Err(Error::UnknownPreset(_))));
        assert!(matches!(preset_problem("nope", 0), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn init_point_is_deterministic_and_feasible() {
        let p = preset_problem("simplex-small", 1).unwrap();
        let a = init_point(&p, 1e-10, 7).unwrap();
        let b = init_point(&p, 1e-10, 7).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert!(p.feasible.is_feasible(&a, 1e-9));
        // a different seed gives a different point
        let c = init_point(&p, 1e-10, 8).unwrap();
        assert!(a.as_slice() != c.as_slice());
    }
}
