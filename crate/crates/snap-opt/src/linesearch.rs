//! Feasible line search along a free-space direction.
//!
//! A step of the full maximum feasible length is accepted whenever it
//! decreases the objective (it either touches a new boundary or already
//! descends enough). Otherwise the step is halved until the
//! direction-dependent sufficient-descent test
//! `f(x + a d) <= f(x) + rho(a) / 2` passes.

use crate::oracle::ProblemInstance;
use crate::poly::ActiveSet;
use crate::{Error, Result, Vector};

/// Which descent estimate drives the backtracking test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    /// `d = -q_pi(x)`; `rho(a) = -a |q_pi|^2`.
    Gradient,
    /// Unit negative-curvature direction; `rho(a) = -a^2 eps_h' / 4`.
    Curvature,
}

/// Step-acceptance flag: the maximum feasible step was taken as-is, or the
/// step was backtracked to sufficient descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepFlag {
    AlphaMax,
    Backtracked,
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub x_next: Vector,
    pub flag: StepFlag,
    pub alpha: f64,
    pub f_next: f64,
    /// Objective evaluations consumed.
    pub evals: usize,
    /// Constraint that became active, when the accepted step was a bounded
    /// maximum step.
    pub boundary_hit: Option<usize>,
}

/// Sufficient-descent reference `rho(alpha)` for the two direction kinds.
pub fn compute_rho(kind: DirectionKind, alpha: f64, q_norm_sq: f64, eps_h_prime: f64) -> f64 {
    match kind {
        DirectionKind::Gradient => -alpha * q_norm_sq,
        DirectionKind::Curvature => -alpha * alpha * eps_h_prime / 4.0,
    }
}

/// Relative floor below which backtracking gives up.
const ALPHA_FLOOR: f64 = 1e-16;

pub fn line_search(
    problem: &ProblemInstance,
    aset: &ActiveSet,
    x: &Vector,
    f_x: f64,
    d_dir: &Vector,
    kind: DirectionKind,
    eps_h_prime: f64,
    l1: f64,
) -> Result<LineSearchOutcome> {
    if kind == DirectionKind::Curvature && eps_h_prime <= 0.0 {
        return Err(Error::InvalidParameter(
            "curvature line search needs a positive eps_h'".into(),
        ));
    }
    let step = problem.feasible.max_step(aset, x, d_dir, l1)?;
    let alpha_max = step.alpha_max;
    let mut evals = 0usize;

    let x_cand = problem.feasible.snap_feasible(x + alpha_max * d_dir);
    let f_cand = problem.f(&x_cand);
    evals += 1;
    if f_cand < f_x {
        return Ok(LineSearchOutcome {
            x_next: x_cand,
            flag: StepFlag::AlphaMax,
            alpha: alpha_max,
            f_next: f_cand,
            evals,
            boundary_hit: if step.bounded { step.hit } else { None },
        });
    }

    let q_norm_sq = d_dir.norm_squared();
    let floor = ALPHA_FLOOR * alpha_max;
    let mut alpha = alpha_max;
    let mut f_trial = f_cand;
    loop {
        let rho = compute_rho(kind, alpha, q_norm_sq, eps_h_prime);
        if f_trial <= f_x + 0.5 * rho {
            let x_next = problem.feasible.snap_feasible(x + alpha * d_dir);
            return Ok(LineSearchOutcome {
                x_next,
                flag: StepFlag::Backtracked,
                alpha,
                f_next: f_trial,
                evals,
                boundary_hit: None,
            });
        }
        alpha *= 0.5;
        if alpha < floor {
            return Err(Error::LineSearchFloor { floor });
        }
        f_trial = problem.f(&(x + alpha * d_dir));
        evals += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{make_problem, Objective, ProblemInstance, ProblemKind};
    use crate::poly::{Polyhedron, ACTIVE_TOL};
    use crate::{Matrix, Vector};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rho_values() {
        assert_relative_eq!(compute_rho(DirectionKind::Gradient, 0.1, 4.0, 0.0), -0.4);
        assert_relative_eq!(compute_rho(DirectionKind::Curvature, 0.2, 0.0, 1.0), -0.01);
        assert_eq!(compute_rho(DirectionKind::Gradient, 0.0, 5.0, 0.0), 0.0);
        assert_eq!(compute_rho(DirectionKind::Curvature, 0.0, 0.0, 3.0), 0.0);
    }

    #[test]
    fn backtracks_on_steep_1d_quadratic() {
        // f(x) = 10 x^2 on [-1, 1], x = 0.5, d = -q_pi = -10.
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::from_row_slice(1, 1, &[20.0]),
                c: Vector::zeros(1),
                lower: Vector::from_vec(vec![-1.0]),
                upper: Vector::from_vec(vec![1.0]),
            },
            0,
        )
        .unwrap();
        let x = Vector::from_vec(vec![0.5]);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let d = Vector::from_vec(vec![-10.0]);
        let out = line_search(&p, &aset, &x, p.f(&x), &d, DirectionKind::Gradient, 0.0, 20.0)
            .unwrap();
        assert_eq!(out.flag, StepFlag::Backtracked);
        assert_relative_eq!(out.alpha, 0.0375, epsilon = 1e-15);
        assert_relative_eq!(out.x_next[0], 0.125, epsilon = 1e-15);
        assert_relative_eq!(out.f_next, 0.15625, epsilon = 1e-12);
    }

    #[test]
    fn boundary_step_accepted_when_it_descends() {
        // f = -x1^2 - x2^2 on [0,1]^2, x = (0.5, 0.5), d = e1.
        let p = crate::oracle::example1();
        let x = Vector::from_vec(vec![0.5, 0.5]);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let d = Vector::from_vec(vec![1.0, 0.0]);
        let out =
            line_search(&p, &aset, &x, p.f(&x), &d, DirectionKind::Curvature, 1.0, 2.0).unwrap();
        assert_eq!(out.flag, StepFlag::AlphaMax);
        assert_relative_eq!(out.alpha, 0.5, epsilon = 1e-15);
        assert_eq!(out.boundary_hit, Some(0));
        assert_relative_eq!(out.x_next[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.f_next, -1.25, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_ray_uses_lipschitz_fallback() {
        // f = 0.5 |x|^2 with no constraints, from (1,1) along -(1,1).
        let p = ProblemInstance::new(
            Objective::Qp { q: Matrix::identity(2, 2), c: Vector::zeros(2) },
            Polyhedron::new(Matrix::zeros(0, 2), Vector::zeros(0)).unwrap(),
            "free",
        )
        .unwrap();
        let x = Vector::from_vec(vec![1.0, 1.0]);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let d = Vector::from_vec(vec![-1.0, -1.0]);
        let out =
            line_search(&p, &aset, &x, p.f(&x), &d, DirectionKind::Gradient, 0.0, 1.0).unwrap();
        assert_eq!(out.flag, StepFlag::AlphaMax);
        assert_eq!(out.boundary_hit, None);
        assert_relative_eq!(out.alpha, 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.x_next.norm(), 0.0, epsilon = 1e-15);
    }

    /// Backtracked gradient steps on quadratics with exact L1 terminate with
    /// `alpha >= 1/(2 L1)` and descent at least `3 |q|^2 / (8 L1)`.
    #[test]
    fn gradient_backtracking_descent_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut exercised = 0;
        for _ in 0..200 {
            let d = 2 + rng.gen_range(0..3);
            // symmetric PSD Q with lambda_max = L1 exactly
            let l1 = 1.0 + rng.gen::<f64>() * 4.0;
            let mut diag = vec![l1];
            for _ in 1..d {
                diag.push(rng.gen::<f64>() * l1);
            }
            let mut q = Matrix::zeros(d, d);
            for i in 0..d {
                q[(i, i)] = diag[i];
            }
            // far-away box so the boundary never interferes
            let p = make_problem(
                ProblemKind::BoxQp {
                    q,
                    c: Vector::zeros(d),
                    lower: Vector::from_element(d, -1e4),
                    upper: Vector::from_element(d, 1e4),
                },
                0,
            )
            .unwrap();
            let x = Vector::from_fn(d, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            let g = p.grad(&x);
            if g.norm() < 1e-8 {
                continue;
            }
            let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
            let f_x = p.f(&x);
            let out = line_search(&p, &aset, &x, f_x, &(-&g), DirectionKind::Gradient, 0.0, l1)
                .unwrap();
            if out.flag == StepFlag::Backtracked {
                exercised += 1;
                assert!(out.alpha >= 0.5 / l1 - 1e-12, "alpha {} below 1/(2 L1)", out.alpha);
                let descent = f_x - out.f_next;
                let bound = 3.0 / (8.0 * l1) * g.norm_squared();
                assert!(descent >= bound - 1e-9 * bound, "descent {descent} < bound {bound}");
            }
        }
        assert!(exercised >= 20, "only {exercised} trials backtracked");
    }

    /// Backtracked curvature steps on cubic-regularized objectives with known
    /// Hessian-Lipschitz constant terminate with `alpha >= 3 eps'/(8 L2)` and
    /// descent at least `0.06 eps'^3 / L2^2`.
    #[test]
    fn curvature_backtracking_descent_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let mut exercised = 0;
        for _ in 0..100 {
            let d = 2 + rng.gen_range(0..3);
            let eps0 = 0.2 + rng.gen::<f64>();
            let l2 = 0.5 + rng.gen::<f64>() * 2.0;
            let mut q = Matrix::zeros(d, d);
            q[(0, 0)] = -eps0;
            for i in 1..d {
                q[(i, i)] = rng.gen::<f64>();
            }
            let p = ProblemInstance::new(
                Objective::CubicReg { q, l2 },
                Polyhedron::axis_box(
                    Vector::from_element(d, -1e5),
                    Vector::from_element(d, 1e5),
                )
                .unwrap(),
                "cubic",
            )
            .unwrap();
            let x = Vector::zeros(d);
            let mut v = Vector::zeros(d);
            v[0] = 1.0;
            let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
            let out = line_search(
                &p,
                &aset,
                &x,
                p.f(&x),
                &v,
                DirectionKind::Curvature,
                eps0,
                p.l1(),
            )
            .unwrap();
            if out.flag == StepFlag::Backtracked {
                exercised += 1;
                assert!(
                    out.alpha >= 3.0 * eps0 / (8.0 * l2) - 1e-12,
                    "alpha {} below 3 eps'/(8 L2) = {}",
                    out.alpha,
                    3.0 * eps0 / (8.0 * l2)
                );
                let descent = -out.f_next; // f(x) = 0
                let bound = 0.06 * eps0.powi(3) / (l2 * l2);
                assert!(descent >= bound, "descent {descent} < bound {bound}");
            }
        }
        assert!(exercised >= 20, "only {exercised} trials backtracked");
    }

    #[test]
    fn never_increases_and_stays_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = crate::oracle::example1();
        for _ in 0..100 {
            let x = Vector::from_fn(2, |_, _| rng.gen::<f64>());
            let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
            let mut d = Vector::from_fn(2, |_, _| rng.gen::<f64>() - 0.5);
            let norm = d.norm();
            if norm < 1e-9 {
                continue;
            }
            d /= norm;
            let f_x = p.f(&x);
            if let Ok(out) =
                line_search(&p, &aset, &x, f_x, &d, DirectionKind::Curvature, 0.5, p.l1())
            {
                assert!(out.f_next <= f_x);
                assert!(p.feasible.is_feasible(&out.x_next, 1e-8));
            }
        }
    }
}
