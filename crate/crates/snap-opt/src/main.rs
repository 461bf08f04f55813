//! `snap` command line: solve problem presets, certify points, run
//! benchmark grids, and execute the invariant suite.

use clap::{Args, Parser, Subcommand};
use snap_opt::bench::{self, Algo};
use snap_opt::eigen::SpGdConfig;
use snap_opt::oracle::{self, Objective, ProblemInstance};
use snap_opt::poly::Polyhedron;
use snap_opt::solver::{self, OracleKind, SolverConfig, Status};
use snap_opt::stationarity::{check_sosp1, check_sosp2_bruteforce, SOSP2_DIM_CAP};
use snap_opt::{io, Error, Result, Vector};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "snap",
    about = "Second-order stationary points of smooth objectives over linear inequality constraints",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solver on a problem preset or on QP data from files.
    Solve(SolveArgs),
    /// Certify a point: first-kind report plus the brute-force second-kind
    /// check on tiny instances.
    Check(CheckArgs),
    /// Run an experiment spec file: algorithm-by-seed grid, traces, summary,
    /// figures.
    Bench(BenchArgs),
    /// Run the invariant suite over every bench preset.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem preset name (example1, nmf-small, nn-small, simplex-small,
    /// pnmf-small).
    #[arg(long)]
    preset: Option<String>,
    /// Data seed for the preset.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Scale of the random linear perturbation restoring strict
    /// complementarity (0 disables).
    #[arg(long, default_value_t = 0.0)]
    q_scale: f64,
    /// Symmetric Q matrix file (QP mode; header `n n`).
    #[arg(long)]
    qp: Option<PathBuf>,
    /// Linear term file for QP mode.
    #[arg(long)]
    lin: Option<PathBuf>,
    /// Polyhedron file (`m d` header, rows `A_j b_j`).
    #[arg(long)]
    poly: Option<PathBuf>,
}

impl ProblemArgs {
    fn build(&self) -> Result<ProblemInstance> {
        let mut problem = match (&self.preset, &self.qp) {
            (Some(name), None) => bench::preset_problem(name, self.seed)?,
            (None, Some(qp_path)) => {
                let q = io::read_matrix(qp_path)?;
                let d = q.nrows();
                let c = match &self.lin {
                    Some(p) => io::read_vector(p)?,
                    None => Vector::zeros(d),
                };
                let poly_path = self.poly.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("QP mode needs --poly <file>".into())
                })?;
                let feasible = Polyhedron::from_text(&std::fs::read_to_string(poly_path)?)?;
                ProblemInstance::new(Objective::Qp { q, c }, feasible, "file-qp")?
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "pass exactly one of --preset or --qp/--poly".into(),
                ))
            }
        };
        if self.q_scale > 0.0 {
            problem = oracle::perturb_linear(&problem, self.q_scale, self.seed ^ 0xABCD)?;
        }
        Ok(problem)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Algorithm: pgd, pgd-ls, snap, snap-plus, snap-simplified.
    #[arg(long, default_value = "snap")]
    algo: String,
    /// Start point as comma-separated numbers (defaults to the preset's
    /// scaled random initialization).
    #[arg(long)]
    point: Option<String>,
    /// Initialization scale c when --point is not given.
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    eps_g: Option<f64>,
    #[arg(long)]
    eps_h: Option<f64>,
    #[arg(long)]
    alpha_pi: Option<f64>,
    /// SP-GD step size.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    r_th: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Negative-eigen-pair oracle: hessian or spgd.
    #[arg(long)]
    oracle: Option<String>,
    /// SP-GD iteration count T.
    #[arg(long = "spgd-T")]
    spgd_t: Option<usize>,
    /// SP-GD initialization radius (script R).
    #[arg(long = "spgd-R")]
    spgd_r: Option<f64>,
    /// SP-GD descent threshold (script F).
    #[arg(long = "spgd-F")]
    spgd_f: Option<f64>,
    /// Remove the stopping criteria (saddle-initialization runs).
    #[arg(long)]
    no_stop: bool,
    /// Output directory for the trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero the wall-clock column of the trace CSV.
    #[arg(long)]
    canonical: bool,
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let algo = Algo::parse(&args.algo)?;
    let problem = args.problem.build()?;
    let mut cfg = match &args.problem.preset {
        Some(name) => bench::preset_config(name, algo)?,
        None => {
            let (variant, oracle_kind) = algo.variant_oracle();
            SolverConfig { variant, oracle: oracle_kind, ..SolverConfig::default() }
        }
    };
    cfg.seed = args.problem.seed;
    if let Some(v) = args.eps_g {
        cfg.eps_g = v;
    }
    if let Some(v) = args.eps_h {
        cfg.eps_h = v;
        if let Some(s) = cfg.spgd.as_mut() {
            s.eps_h = v;
        }
    }
    if let Some(v) = args.alpha_pi {
        cfg.alpha_pi = Some(v);
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.r_th {
        cfg.r_th = v;
    }
    if let Some(v) = args.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = &args.oracle {
        cfg.oracle = OracleKind::parse(v)?;
    }
    if args.no_stop {
        cfg.no_stop = true;
    }
    if args.beta.is_some() || args.spgd_t.is_some() || args.spgd_r.is_some() || args.spgd_f.is_some()
    {
        let base = cfg
            .spgd
            .take()
            .unwrap_or_else(|| SpGdConfig::practical(100, 1e-4, 1e-9, 1e-2, cfg.eps_h, cfg.delta));
        cfg.spgd = Some(SpGdConfig {
            t: args.spgd_t.unwrap_or(base.t),
            script_r: args.spgd_r.unwrap_or(base.script_r),
            script_f: args.spgd_f.unwrap_or(base.script_f),
            beta: args.beta.unwrap_or(base.beta),
            ..base
        });
    }

    let x1 = match &args.point {
        Some(text) => io::parse_vector(text)?,
        None => {
            let c = args.init_scale.or_else(|| {
                args.problem.preset.as_deref().and_then(|p| bench::preset_spec(p).ok()).map(|s| s.init_scale)
            });
            bench::init_point(&problem, c.unwrap_or(1.0), args.problem.seed)?
        }
    };
    let result = solver::solve(&problem, &x1, &cfg)?;

    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| {
            let root = std::env::var("SNAP_OUT_ROOT").unwrap_or_else(|_| "runs".into());
            PathBuf::from(root).join(format!("solve-{}", problem.name))
        });
    std::fs::create_dir_all(&out_dir)?;
    let trace_path = out_dir.join("trace.csv");
    std::fs::write(&trace_path, solver::trace_to_csv(&result.trace, args.canonical))?;
    println!("trace = {}", trace_path.display());
    print!("{}", solver::summary_block(&problem, &result));
    Ok(if result.status == Status::LineSearchFailure { 1 } else { 0 })
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Point to certify, comma-separated.
    #[arg(long, conflicts_with = "point_file")]
    point: Option<String>,
    /// File with the point to certify.
    #[arg(long)]
    point_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    eps_g: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps_h: f64,
    /// Proximal-gradient step (defaults to 1/L1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Grid resolution per dimension for the brute-force second-kind check.
    #[arg(long, default_value_t = 64)]
    grid_n: usize,
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let problem = args.problem.build()?;
    let x = match (&args.point, &args.point_file) {
        (Some(text), None) => io::parse_vector(text)?,
        (None, Some(path)) => io::read_vector(path)?,
        _ => return Err(Error::InvalidParameter("pass exactly one of --point or --point-file".into())),
    };
    if x.len() != problem.dim() {
        return Err(Error::Shape(format!(
            "point has {} entries but the problem has dimension {}",
            x.len(),
            problem.dim()
        )));
    }
    let report = check_sosp1(&problem, &x, args.eps_g, args.eps_h, args.alpha)?;
    println!("problem: {}", problem.name);
    print!("{}", report.human());
    if problem.dim() <= SOSP2_DIM_CAP {
        let s2 = check_sosp2_bruteforce(&problem, &x, args.eps_g, args.eps_h, args.grid_n)?;
        println!("fosp2 (brute force)   : {} (linear min {:.6e})", s2.fosp2, s2.linear_min);
        println!("sosp2 (brute force)   : {}", s2.sosp2);
        if let Some(w) = &s2.witness {
            let coords: Vec<String> = w.iter().map(|t| format!("{t:.6}")).collect();
            println!(
                "witness               : ({}) with quadratic form {:.6e}",
                coords.join(", "),
                s2.witness_form
            );
        }
    } else {
        println!(
            "sosp2 (brute force)   : skipped (dimension {} above cap {})",
            problem.dim(),
            SOSP2_DIM_CAP
        );
    }
    println!();
    println!("{}", snap_opt::stationarity::StationarityReport::csv_header());
    println!("{}", report.csv_row());
    Ok(0)
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    let mut spec = bench::parse_spec_file(&args.spec)?;
    if let Some(out) = &args.out {
        spec.out_dir = Some(out.clone());
    }
    let artifact = bench::run_experiment(&spec)?;
    println!("out_dir = {}", artifact.out_dir.display());
    println!("summary = {}", artifact.summary_path.display());
    for fig in &artifact.figures {
        println!("figure = {}", fig.display());
    }
    let mut failed = 0;
    for c in &artifact.cells {
        let line = format!(
            "{}/s{}: status={} final_f={:.6e} iters={}",
            c.algo.as_str(),
            c.seed,
            c.status,
            c.final_f,
            c.iters
        );
        println!("{line}");
        if let Some(e) = &c.error {
            eprintln!("  error: {e}");
            failed += 1;
        }
    }
    Ok(if failed > 0 { 1 } else { 0 })
}

#[derive(Args)]
struct VerifyArgs {
    /// Truncate the grids for a fast smoke pass.
    #[arg(long)]
    quick: bool,
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let report = bench::verify_presets(args.quick)?;
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { 1 })
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_)
        | Error::Parse(_)
        | Error::Shape(_)
        | Error::UnknownPreset(_)
        | Error::Io(_)
        | Error::DimensionCap { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
