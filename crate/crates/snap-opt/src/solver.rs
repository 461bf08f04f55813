//! The SNAP solver family and first-order baselines.
//!
//! `snap` alternates projected gradient descent with negative-curvature
//! descent: while the proximal-gradient gap exceeds `eps_g` it performs PGD
//! steps; once the gap is small it consults a negative-eigen-pair oracle and
//! either walks along the returned direction (through the feasible line
//! search) or certifies the point. `snap` with the gradient-difference
//! oracle is SNAP+. `snap-simplified` always takes the curvature direction
//! and has no `r_th` gating. `pgd` and `pgd-ls` are the baselines.

use crate::eigen::{default_spgd_config, negative_eigen_pair_hessian, sp_gd, SpGdConfig};
use crate::linesearch::{line_search, DirectionKind, StepFlag};
use crate::oracle::ProblemInstance;
use crate::poly::{FreeSpaceBasis, ACTIVE_TOL, FEAS_TOL, RANK_TOL};
use crate::stationarity::check_sosp1;
use crate::{Error, Result, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Snap,
    SnapSimplified,
    Pgd,
    PgdLs,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "snap" => Variant::Snap,
            "snap-simplified" => Variant::SnapSimplified,
            "pgd" => Variant::Pgd,
            "pgd-ls" => Variant::PgdLs,
            other => return Err(Error::InvalidParameter(format!("unknown variant `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Hessian,
    SpGd,
}

impl OracleKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "hessian" => OracleKind::Hessian,
            "spgd" => OracleKind::SpGd,
            other => return Err(Error::InvalidParameter(format!("unknown oracle `{other}`"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub eps_g: f64,
    pub eps_h: f64,
    /// PGD step; `None` means `1/L1`.
    pub alpha_pi: Option<f64>,
    /// Oracle failure probability.
    pub delta: f64,
    /// Forced PGD-block length after a backtracked negative-curvature step.
    pub r_th: usize,
    pub max_iter: usize,
    pub oracle: OracleKind,
    pub variant: Variant,
    /// SP-GD constants; `None` derives the theory-mode defaults from the
    /// problem's Lipschitz estimates.
    pub spgd: Option<SpGdConfig>,
    pub seed: u64,
    /// Keep iterating after the stopping test would fire (the saddle
    /// initialization experiments remove stopping criteria).
    pub no_stop: bool,
    pub active_tol: f64,
    pub rank_tol: f64,
    pub feas_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_g: 1e-6,
            eps_h: 1e-3,
            alpha_pi: None,
            delta: 0.1,
            r_th: 0,
            max_iter: 100_000,
            oracle: OracleKind::Hessian,
            variant: Variant::Snap,
            spgd: None,
            seed: 0,
            no_stop: false,
            active_tol: ACTIVE_TOL,
            rank_tol: RANK_TOL,
            feas_tol: FEAS_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sosp1Certified,
    /// The first-order baselines stop at `|g_pi| <= eps_g`.
    Fosp1Reached,
    MaxIter,
    LineSearchFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Sosp1Certified => "sosp1-certified",
            Status::Fosp1Reached => "fosp1-reached",
            Status::MaxIter => "max-iter",
            Status::LineSearchFailure => "line-search-failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Pgd,
    NcdGrad,
    NcdCurv,
    Boundary,
    OracleCall,
    Final,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Pgd => "PGD",
            StepKind::NcdGrad => "NCD-grad",
            StepKind::NcdCurv => "NCD-curv",
            StepKind::Boundary => "boundary",
            StepKind::OracleCall => "oracle-call",
            StepKind::Final => "final",
        }
    }
}

/// One per-iteration telemetry record. `f` and `fosp1_gap` describe the
/// iterate the action started from; the terminal record carries the final
/// point.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iter: usize,
    pub elapsed_s: f64,
    pub f: f64,
    pub fosp1_gap: f64,
    pub step: StepKind,
    pub alpha: Option<f64>,
    pub curvature_estimate: Option<f64>,
    pub active_count: usize,
    pub free_dim: Option<usize>,
    /// Line-search acceptance flag, on NCD iterations.
    pub flag_alpha: Option<StepFlag>,
    /// Constraint that became active, when the step was a bounded max step.
    pub boundary_hit: Option<usize>,
    pub oracle_consulted: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_final: Vector,
    pub f_final: f64,
    pub status: Status,
    pub trace: Vec<TraceRecord>,
    pub oracle_calls: usize,
    pub wall_time_s: f64,
    pub iters: usize,
    /// Independent `check_sosp1` verdict at the output, when certified.
    pub certified_recheck: Option<bool>,
    /// Largest constraint violation observed over all iterates.
    pub worst_infeasibility: f64,
    /// Largest `| |v| - 1 |` over oracle directions that reported curvature.
    pub oracle_dir_norm_err: f64,
    /// Largest `|A'(x) v|` over oracle directions that reported curvature.
    pub oracle_dir_free_err: f64,
}

/// One projected gradient step `proj(x - alpha grad f(x))`.
pub fn pgd_step(problem: &ProblemInstance, x: &Vector, alpha: f64) -> Result<Vector> {
    let target = x - alpha * problem.grad(x);
    problem.feasible.project(&target, crate::poly::PROJ_TOL)
}

/// Choose between the projected-gradient direction and the curvature
/// direction. Flips `v` so that `q_pi . v <= 0` first, then applies the
/// descent comparison with the `L1 eps'/L2` weighting.
pub fn select_direction(
    q_pi: &Vector,
    v: &Vector,
    eps_h_prime: f64,
    l1: f64,
    l2: f64,
) -> (Vector, DirectionKind) {
    let v = if q_pi.dot(v) > 0.0 { -v.clone() } else { v.clone() };
    let l2 = l2.max(f64::EPSILON);
    let lhs = (l1 * eps_h_prime / l2) * q_pi.dot(&v)
        - 63.0 * l1 * eps_h_prime.powi(3) / (128.0 * l2 * l2);
    if lhs >= -q_pi.norm_squared() {
        (-q_pi.clone(), DirectionKind::Gradient)
    } else {
        (v, DirectionKind::Curvature)
    }
}

/// Run the configured solver from `x1` (projected onto the feasible set
/// first when necessary).
pub fn solve(problem: &ProblemInstance, x1: &Vector, cfg: &SolverConfig) -> Result<SolveResult> {
    if x1.len() != problem.dim() {
        return Err(Error::Shape("initial point has the wrong dimension".into()));
    }
    if cfg.eps_g <= 0.0 || cfg.eps_h <= 0.0 {
        return Err(Error::InvalidParameter("eps_g and eps_h must be positive".into()));
    }
    if cfg.oracle == OracleKind::Hessian && !problem.objective.has_hess_vec() {
        return Err(Error::NoHessian);
    }
    let mut l1 = problem.l1();
    let mut l2 = problem.l2();
    let mut lipschitz_radius = problem.lipschitz_radius;
    let alpha_pi = match cfg.alpha_pi {
        Some(a) if a > 0.0 => a,
        Some(_) => return Err(Error::InvalidParameter("alpha_pi must be positive".into())),
        None => 1.0 / l1,
    };
    let spgd_cfg: SpGdConfig = match &cfg.spgd {
        Some(c) => {
            if !c.practical_override {
                if c.beta * l1 > 1.0 + 1e-12 {
                    return Err(Error::InvalidParameter("spgd beta exceeds 1/L1".into()));
                }
                if c.c_hat < 51.0 {
                    return Err(Error::InvalidParameter("spgd c_hat must be at least 51".into()));
                }
            }
            c.clone()
        }
        None => default_spgd_config(l1, l2, problem.dim(), cfg.eps_h.min(l1), cfg.delta)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let clock = Instant::now();

    let mut x = if problem.feasible.is_feasible(x1, cfg.feas_tol) {
        x1.clone()
    } else {
        problem.feasible.project(x1, crate::poly::PROJ_TOL)?
    };
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut oracle_calls = 0usize;
    let mut flag_alpha = StepFlag::AlphaMax;
    let mut r_last = 0usize;
    let mut status = Status::MaxIter;
    let mut iters = 0usize;
    let mut worst_infeasibility = f64::NEG_INFINITY;
    let mut oracle_dir_norm_err = 0.0f64;
    let mut oracle_dir_free_err = 0.0f64;

    'outer: for r in 1..=cfg.max_iter {
        iters = r;
        worst_infeasibility = worst_infeasibility.max(problem.feasible.violation(&x));
        if lipschitz_radius.is_finite() && x.norm() > lipschitz_radius {
            lipschitz_radius = 2.0 * x.norm();
            let (nl1, nl2) = problem.lipschitz_at_radius(lipschitz_radius);
            l1 = nl1;
            l2 = nl2;
        }
        let f_here = problem.f(&x);
        let grad = problem.grad(&x);
        let proj_target = problem.feasible.project(&(&x - alpha_pi * &grad), crate::poly::PROJ_TOL)?;
        let g_pi = (&proj_target - &x) / alpha_pi;
        let gap = g_pi.norm();
        let active_count = problem.feasible.active_count(&x, cfg.active_tol);
        let elapsed = clock.elapsed().as_secs_f64();
        let mut record = TraceRecord {
            iter: r,
            elapsed_s: elapsed,
            f: f_here,
            fosp1_gap: gap,
            step: StepKind::Pgd,
            alpha: None,
            curvature_estimate: None,
            active_count,
            free_dim: None,
            flag_alpha: None,
            boundary_hit: None,
            oracle_consulted: false,
        };

        match cfg.variant {
            Variant::Pgd | Variant::PgdLs => {
                if gap <= cfg.eps_g && !cfg.no_stop {
                    record.step = StepKind::Final;
                    trace.push(record);
                    status = Status::Fosp1Reached;
                    break 'outer;
                }
                if cfg.variant == Variant::Pgd {
                    x = problem.feasible.snap_feasible(proj_target);
                    record.alpha = Some(alpha_pi);
                } else {
                    let (next, used) = armijo_pgd_step(problem, &x, f_here, &grad)?;
                    x = next;
                    record.alpha = Some(used);
                }
                trace.push(record);
            }
            Variant::Snap | Variant::SnapSimplified => {
                let gate_flag = cfg.variant == Variant::SnapSimplified
                    || flag_alpha == StepFlag::AlphaMax
                    || r - r_last >= cfg.r_th;
                if gap <= cfg.eps_g && gate_flag {
                    let aset = problem.feasible.active_set(&x, cfg.active_tol)?;
                    let basis = FreeSpaceBasis::new(&problem.feasible, &aset, cfg.rank_tol);
                    record.free_dim = Some(basis.k());
                    record.oracle_consulted = true;
                    oracle_calls += 1;
                    let pair = match cfg.oracle {
                        OracleKind::Hessian => negative_eigen_pair_hessian(
                            problem, &x, &basis, cfg.eps_h, cfg.delta, &mut rng,
                        ),
                        OracleKind::SpGd => sp_gd(problem, &x, &basis, &spgd_cfg, &mut rng),
                    };
                    if pair.found {
                        oracle_dir_norm_err =
                            oracle_dir_norm_err.max((pair.direction.norm() - 1.0).abs());
                        let active_component: f64 = aset
                            .active
                            .iter()
                            .map(|&j| {
                                let row = problem.feasible.a().row(j);
                                let dot = row.dot(&pair.direction.transpose());
                                dot * dot
                            })
                            .sum::<f64>()
                            .sqrt();
                        oracle_dir_free_err = oracle_dir_free_err.max(active_component);
                        let q_pi = basis.project(&grad);
                        let eps_prime = -pair.curvature_estimate;
                        let (d_dir, kind) = if cfg.variant == Variant::SnapSimplified {
                            let v = if q_pi.dot(&pair.direction) > 0.0 {
                                -pair.direction.clone()
                            } else {
                                pair.direction.clone()
                            };
                            (v, DirectionKind::Curvature)
                        } else {
                            select_direction(&q_pi, &pair.direction, eps_prime, l1, l2)
                        };
                        match line_search(problem, &aset, &x, f_here, &d_dir, kind, eps_prime, l1)
                        {
                            Ok(out) => {
                                record.step = match (out.flag, kind) {
                                    (StepFlag::AlphaMax, _) if out.boundary_hit.is_some() => {
                                        StepKind::Boundary
                                    }
                                    (_, DirectionKind::Gradient) => StepKind::NcdGrad,
                                    (_, DirectionKind::Curvature) => StepKind::NcdCurv,
                                };
                                record.alpha = Some(out.alpha);
                                record.curvature_estimate = Some(pair.curvature_estimate);
                                record.flag_alpha = Some(out.flag);
                                record.boundary_hit = out.boundary_hit;
                                if out.flag == StepFlag::Backtracked {
                                    r_last = r;
                                }
                                flag_alpha = out.flag;
                                x = out.x_next;
                                trace.push(record);
                            }
                            Err(Error::LineSearchFloor { .. }) if cfg.no_stop => {
                                // benchmark mode keeps going: treat the dead
                                // direction like a failed oracle probe
                                record.step = StepKind::OracleCall;
                                record.curvature_estimate = Some(pair.curvature_estimate);
                                record.alpha = Some(alpha_pi);
                                r_last = r;
                                flag_alpha = StepFlag::Backtracked;
                                x = problem.feasible.snap_feasible(proj_target);
                                trace.push(record);
                            }
                            Err(Error::LineSearchFloor { .. }) => {
                                record.step = StepKind::Final;
                                record.curvature_estimate = Some(pair.curvature_estimate);
                                trace.push(record);
                                status = Status::LineSearchFailure;
                                break 'outer;
                            }
                            Err(other) => return Err(other),
                        }
                    } else {
                        record.step = StepKind::OracleCall;
                        record.curvature_estimate = Some(0.0);
                        if cfg.no_stop {
                            // Continue past certification: space out further
                            // oracle calls like a backtracked NCD step would.
                            r_last = r;
                            flag_alpha = StepFlag::Backtracked;
                            x = problem.feasible.snap_feasible(proj_target);
                            record.alpha = Some(alpha_pi);
                            trace.push(record);
                        } else {
                            trace.push(record);
                            status = Status::Sosp1Certified;
                            break 'outer;
                        }
                    }
                } else {
                    x = problem.feasible.snap_feasible(proj_target);
                    record.alpha = Some(alpha_pi);
                    trace.push(record);
                }
            }
        }
    }

    let f_final = problem.f(&x);
    // Terminal record, unless the loop already emitted one for this point.
    let needs_final = !matches!(
        trace.last(),
        Some(t) if t.step == StepKind::Final || (t.step == StepKind::OracleCall && status == Status::Sosp1Certified)
    );
    if needs_final {
        let grad = problem.grad(&x);
        let proj_target = problem.feasible.project(&(&x - alpha_pi * &grad), crate::poly::PROJ_TOL)?;
        let gap = (&proj_target - &x).norm() / alpha_pi;
        trace.push(TraceRecord {
            iter: iters + 1,
            elapsed_s: clock.elapsed().as_secs_f64(),
            f: f_final,
            fosp1_gap: gap,
            step: StepKind::Final,
            alpha: None,
            curvature_estimate: None,
            active_count: problem.feasible.active_count(&x, cfg.active_tol),
            free_dim: None,
            flag_alpha: None,
            boundary_hit: None,
            oracle_consulted: false,
        });
    }

    let certified_recheck = if status == Status::Sosp1Certified {
        Some(check_sosp1(problem, &x, cfg.eps_g, cfg.eps_h, Some(alpha_pi))?.sosp1)
    } else {
        None
    };

    worst_infeasibility = worst_infeasibility.max(problem.feasible.violation(&x));
    Ok(SolveResult {
        x_final: x,
        f_final,
        status,
        trace,
        oracle_calls,
        wall_time_s: clock.elapsed().as_secs_f64(),
        iters,
        certified_recheck,
        worst_infeasibility,
        oracle_dir_norm_err,
        oracle_dir_free_err,
    })
}

/// Projected gradient step with Armijo backtracking from `alpha = 1`:
/// accept `x(a) = proj(x - a grad)` once
/// `f(x(a)) <= f(x) - 1e-4 a |g_pi^a|^2`.
fn armijo_pgd_step(
    problem: &ProblemInstance,
    x: &Vector,
    f_x: f64,
    grad: &Vector,
) -> Result<(Vector, f64)> {
    let mut alpha = 1.0f64;
    loop {
        let cand = problem.feasible.project(&(x - alpha * grad), crate::poly::PROJ_TOL)?;
        let step = (&cand - x) / alpha;
        if problem.f(&cand) <= f_x - 1e-4 * alpha * step.norm_squared() {
            return Ok((problem.feasible.snap_feasible(cand), alpha));
        }
        alpha *= 0.5;
        if alpha < 1e-16 {
            // No progress possible; stand still (stationary for PGD).
            return Ok((x.clone(), alpha));
        }
    }
}

/// Exact trace CSV schema used by the CLI and the benchmark harness.
pub const TRACE_CSV_HEADER: &str =
    "iter,elapsed_s,f,fosp1_gap,step_kind,alpha,curvature_est,active_count,free_dim";

/// Render the trace as CSV. With `canonical` set, the wall-clock column is
/// zeroed so replicated runs compare byte-for-byte.
pub fn trace_to_csv(trace: &[TraceRecord], canonical: bool) -> String {
    let mut s = String::with_capacity(64 * (trace.len() + 1));
    s.push_str(TRACE_CSV_HEADER);
    s.push('\n');
    for t in trace {
        let elapsed = if canonical { 0.0 } else { t.elapsed_s };
        s.push_str(&format!(
            "{},{:.6},{:.12e},{:.12e},{},{},{},{},{}\n",
            t.iter,
            elapsed,
            t.f,
            t.fosp1_gap,
            t.step.as_str(),
            t.alpha.map_or(String::new(), |a| format!("{a:.6e}")),
            t.curvature_estimate.map_or(String::new(), |c| format!("{c:.6e}")),
            t.active_count,
            t.free_dim.map_or(String::new(), |k| k.to_string()),
        ));
    }
    s
}

/// Key/value summary block printed by the CLI after a solve.
pub fn summary_block(problem: &ProblemInstance, result: &SolveResult) -> String {
    let mut s = String::new();
    s.push_str(&format!("problem = {}\n", problem.name));
    s.push_str(&format!("status = {}\n", result.status.as_str()));
    s.push_str(&format!("f_final = {:.12e}\n", result.f_final));
    s.push_str(&format!("iters = {}\n", result.iters));
    s.push_str(&format!("oracle_calls = {}\n", result.oracle_calls));
    s.push_str(&format!("wall_time_s = {:.3}\n", result.wall_time_s));
    if let Some(ok) = result.certified_recheck {
        s.push_str(&format!("certified_recheck = {ok}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{example1, make_problem, perturb_with, ProblemKind};
    use crate::{Matrix, Vector};
    use approx::assert_relative_eq;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    #[test]
    fn pgd_step_examples() {
        // f = 0.5|x|^2 over the orthant: one unit step from (1,1) lands at 0.
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::identity(2, 2),
                c: Vector::zeros(2),
                lower: Vector::zeros(2),
                upper: Vector::from_element(2, 1e9),
            },
            0,
        )
        .unwrap();
        let next = pgd_step(&p, &vec2(1.0, 1.0), 1.0).unwrap();
        assert_relative_eq!(next.norm(), 0.0, epsilon = 1e-15);

        let e1 = example1();
        let next = pgd_step(&e1, &vec2(0.5, 0.5), 0.25).unwrap();
        assert_relative_eq!(next[0], 0.75, epsilon = 1e-15);
        assert_relative_eq!(next[1], 0.75, epsilon = 1e-15);

        let next = pgd_step(&e1, &vec2(0.9, 0.9), 0.25).unwrap();
        assert_relative_eq!(next[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(next[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn select_direction_cases() {
        // q_pi = 0: the curvature direction wins.
        let q0 = Vector::zeros(2);
        let v = Vector::from_vec(vec![0.0, 1.0]);
        let (d, kind) = select_direction(&q0, &v, 1.0, 1.0, 1.0);
        assert_eq!(kind, DirectionKind::Curvature);
        assert_relative_eq!((d - &v).norm(), 0.0);

        // |q|^2 = 10, q.v = -1: lhs = -1 - 63/128 >= -10, gradient wins.
        let q = Vector::from_vec(vec![10.0f64.sqrt(), 0.0]);
        let v = Vector::from_vec(vec![-1.0 / 10.0f64.sqrt(), (1.0 - 0.1f64).sqrt()]);
        assert_relative_eq!(q.dot(&v), -1.0, epsilon = 1e-12);
        let (d, kind) = select_direction(&q, &v, 1.0, 1.0, 1.0);
        assert_eq!(kind, DirectionKind::Gradient);
        assert_relative_eq!((d + &q).norm(), 0.0, epsilon = 1e-12);

        // positive alignment gets flipped first
        let q = Vector::from_vec(vec![1.0, 0.0]);
        let v = Vector::from_vec(vec![0.3, 0.9]);
        let (d, kind) = select_direction(&q, &v, 1.0, 1.0, 1e-12);
        assert_eq!(kind, DirectionKind::Curvature);
        assert!(q.dot(&d) <= 0.0);
    }

    #[test]
    fn snap_certifies_perturbed_example1() {
        let p = perturb_with(&example1(), vec2(0.1, 0.1)).unwrap();
        let cfg = SolverConfig {
            eps_g: 1e-6,
            eps_h: 1e-3,
            alpha_pi: Some(0.25),
            max_iter: 2000,
            ..SolverConfig::default()
        };
        let r = solve(&p, &vec2(0.5, 0.5), &cfg).unwrap();
        assert_eq!(r.status, Status::Sosp1Certified);
        assert_eq!(r.certified_recheck, Some(true));
        // the perturbed global minimum is the (1,1) corner with f = -1.8
        assert_relative_eq!(r.f_final, -1.8, epsilon = 1e-9);
        for w in r.trace.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-12 * w[0].f.abs().max(1.0));
        }
    }

    #[test]
    fn snap_simplified_also_certifies() {
        let p = perturb_with(&example1(), vec2(0.1, 0.1)).unwrap();
        let cfg = SolverConfig {
            variant: Variant::SnapSimplified,
            eps_g: 1e-6,
            eps_h: 1e-3,
            alpha_pi: Some(0.25),
            max_iter: 2000,
            ..SolverConfig::default()
        };
        let r = solve(&p, &vec2(0.5, 0.5), &cfg).unwrap();
        assert_eq!(r.status, Status::Sosp1Certified);
        assert_relative_eq!(r.f_final, -1.8, epsilon = 1e-9);
    }

    #[test]
    fn snap_reaches_strictly_convex_box_qp_minimum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for trial in 0..10 {
            let d = 2 + (trial % 2);
            let g = Matrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
            let q = &g * g.transpose() + Matrix::identity(d, d) * 0.5;
            let c = Vector::from_fn(d, |_, _| rng.gen::<f64>() - 0.5);
            let p = make_problem(
                ProblemKind::BoxQp {
                    q: q.clone(),
                    c: c.clone(),
                    lower: Vector::zeros(d),
                    upper: Vector::from_element(d, 1.0),
                },
                0,
            )
            .unwrap();
            let cfg = SolverConfig { eps_g: 1e-8, eps_h: 1e-6, max_iter: 50_000, ..Default::default() };
            let x0 = Vector::from_element(d, 0.5);
            let r = solve(&p, &x0, &cfg).unwrap();
            assert_eq!(r.status, Status::Sosp1Certified, "trial {trial}");
            let xstar = brute_force_box_qp_min(&q, &c, d);
            assert!(
                (&r.x_final - &xstar).norm() <= 1e-4,
                "trial {trial}: got {:?} want {:?}",
                r.x_final.as_slice(),
                xstar.as_slice()
            );
        }
    }

    /// Enumerate all lower/free/upper patterns of the unit box and return the
    /// best KKT point (closed-form oracle for strictly convex QPs).
    fn brute_force_box_qp_min(q: &Matrix, c: &Vector, d: usize) -> Vector {
        let mut best: Option<(f64, Vector)> = None;
        for pattern in 0..3usize.pow(d as u32) {
            let mut code = pattern;
            let mut fixed = vec![0i8; d];
            for f in fixed.iter_mut() {
                *f = (code % 3) as i8 - 1; // -1 lower, 0 free, +1 upper
                code /= 3;
            }
            let free: Vec<usize> = (0..d).filter(|&i| fixed[i] == 0).collect();
            let mut x = Vector::from_fn(d, |i, _| match fixed[i] {
                -1 => 0.0,
                1 => 1.0,
                _ => 0.0,
            });
            if !free.is_empty() {
                let mut qff = Matrix::zeros(free.len(), free.len());
                let mut rhs = Vector::zeros(free.len());
                for (a, &i) in free.iter().enumerate() {
                    rhs[a] = -c[i] - (0..d).filter(|j| fixed[*j] != 0).map(|j| q[(i, j)] * x[j]).sum::<f64>();
                    for (b, &j) in free.iter().enumerate() {
                        qff[(a, b)] = q[(i, j)];
                    }
                }
                match qff.lu().solve(&rhs) {
                    Some(sol) => {
                        for (a, &i) in free.iter().enumerate() {
                            x[i] = sol[a];
                        }
                    }
                    None => continue,
                }
            }
            if (0..d).any(|i| x[i] < -1e-9 || x[i] > 1.0 + 1e-9) {
                continue;
            }
            // KKT sign conditions at the fixed coordinates
            let grad = q * &x + c;
            let ok = (0..d).all(|i| match fixed[i] {
                -1 => grad[i] >= -1e-9,
                1 => grad[i] <= 1e-9,
                _ => true,
            });
            if !ok {
                continue;
            }
            let val = 0.5 * x.dot(&(q * &x)) + c.dot(&x);
            if best.as_ref().map_or(true, |(b, _)| val < *b) {
                best = Some((val, x));
            }
        }
        best.expect("strictly convex box QP has a minimum").1
    }

    #[test]
    fn pgd_never_moves_from_exact_saddle() {
        // stopping criteria removed, as in the saddle-initialization runs
        let p = example1();
        let cfg = SolverConfig {
            variant: Variant::Pgd,
            eps_g: 1e-6,
            max_iter: 50,
            alpha_pi: Some(0.25),
            no_stop: true,
            ..Default::default()
        };
        let r = solve(&p, &vec2(0.0, 0.0), &cfg).unwrap();
        assert_eq!(r.status, Status::MaxIter);
        assert_relative_eq!(r.x_final.norm(), 0.0, epsilon = 1e-300);
        assert_eq!(r.f_final, 0.0);
    }

    #[test]
    fn oracle_gate_respects_eps_g_and_r_th() {
        let p = perturb_with(&example1(), vec2(0.05, 0.02)).unwrap();
        let cfg = SolverConfig {
            eps_g: 1e-4,
            eps_h: 1e-3,
            alpha_pi: Some(0.25),
            r_th: 7,
            max_iter: 5000,
            ..Default::default()
        };
        let r = solve(&p, &vec2(0.3, 0.6), &cfg).unwrap();
        let mut last_backtracked: Option<usize> = None;
        for t in &r.trace {
            if t.oracle_consulted {
                assert!(t.fosp1_gap <= cfg.eps_g, "oracle consulted at gap {}", t.fosp1_gap);
                if let Some(rl) = last_backtracked {
                    assert!(t.iter - rl >= cfg.r_th, "oracle at {} after backtrack at {rl}", t.iter);
                }
            }
            if t.flag_alpha == Some(StepFlag::Backtracked) {
                last_backtracked = Some(t.iter);
            }
        }
    }

    #[test]
    fn trace_csv_has_pinned_schema() {
        let p = example1();
        let cfg = SolverConfig {
            variant: Variant::Pgd,
            max_iter: 3,
            alpha_pi: Some(0.1),
            ..Default::default()
        };
        let r = solve(&p, &vec2(0.2, 0.3), &cfg).unwrap();
        let csv = trace_to_csv(&r.trace, true);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iter,elapsed_s,f,fosp1_gap,step_kind,alpha,curvature_est,active_count,free_dim"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,0.000000,"));
    }
}
