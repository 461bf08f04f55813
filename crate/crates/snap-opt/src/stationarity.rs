//! Optimality measurement and certificates.
//!
//! First-order optimality is measured by the proximal gradient
//! `g_pi(x) = (proj(x - a grad f(x)) - x) / a`; second-order optimality of
//! the first kind by the smallest eigenvalue of the Hessian restricted to
//! the free space of the active constraints. The second-kind conditions
//! (all feasible directions orthogonal to the gradient) are NP-hard to
//! check in general and are provided only as a brute-force oracle for tiny
//! instances.

use crate::oracle::ProblemInstance;
use crate::poly::{ActiveSet, FreeSpaceBasis, ACTIVE_TOL, RANK_TOL};
use crate::{Error, Matrix, Result, Vector};

/// Multipliers below this threshold fail strict complementarity.
pub const SC_TOL: f64 = 1e-8;
/// Relative tolerance on the stationarity residual for calling a point KKT.
pub const KKT_TOL: f64 = 1e-6;
/// Least-squares multipliers above `-NEG_MULT_TOL` are clamped to zero;
/// anything more negative marks the KKT fit as failed.
const NEG_MULT_TOL: f64 = 1e-10;

/// Proximal gradient `g_pi(x) = (proj(x - alpha grad f(x)) - x) / alpha`.
pub fn prox_gradient(problem: &ProblemInstance, x: &Vector, alpha: f64) -> Result<Vector> {
    if alpha <= 0.0 {
        return Err(Error::InvalidParameter("prox-gradient step must be positive".into()));
    }
    let target = x - alpha * problem.grad(x);
    let projected = problem.feasible.project(&target, crate::poly::PROJ_TOL)?;
    Ok((projected - x) / alpha)
}

/// Projected gradient `q_pi(x) = P(x) grad f(x)`.
pub fn projected_gradient(problem: &ProblemInstance, basis: &FreeSpaceBasis, x: &Vector) -> Vector {
    basis.project(&problem.grad(x))
}

/// Smallest eigenpair of the restricted Hessian `Z^T hess Z`, assembled
/// column by column from Hessian-vector products. Returns `None` when the
/// free space is trivial (the second-order condition is vacuous).
pub fn restricted_min_eig(
    problem: &ProblemInstance,
    basis: &FreeSpaceBasis,
    x: &Vector,
) -> Result<Option<(f64, Vector)>> {
    if !problem.objective.has_hess_vec() {
        return Err(Error::NoHessian);
    }
    let k = basis.k();
    if k == 0 {
        return Ok(None);
    }
    let mut m = Matrix::zeros(k, k);
    for j in 0..k {
        let zj: Vector = basis.z().column(j).into();
        let hz = problem.hess_vec(x, &zj);
        let col = basis.z().transpose() * hz;
        m.set_column(j, &col);
    }
    // symmetrize against roundoff
    let m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut min_idx = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let u: Vector = eig.eigenvectors.column(min_idx).into();
    let mut v = basis.lift(&u);
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    Ok(Some((eig.eigenvalues[min_idx], v)))
}

/// KKT multiplier fit and strict-complementarity verdict at `x`.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// `(constraint index, multiplier)` over the active set.
    pub multipliers: Vec<(usize, f64)>,
    /// `| grad f + sum mu_j A_j |` with the clamped multipliers.
    pub kkt_residual: f64,
    /// Residual small enough to call the point KKT.
    pub kkt_ok: bool,
    /// Some least-squares multiplier was more negative than the clamp
    /// threshold; the fit is reported but not trusted.
    pub fit_failed: bool,
    pub sc_holds: bool,
    /// Infinity when no constraint is active.
    pub min_active_multiplier: f64,
}

/// Fit nonnegative multipliers for `grad f(x) + sum mu_j A_j = 0` over the
/// active rows by least squares, clamping tiny negatives.
pub fn kkt_and_sc(
    problem: &ProblemInstance,
    x: &Vector,
    aset: &ActiveSet,
    kkt_tol: f64,
) -> KktReport {
    let grad = problem.grad(x);
    let gnorm = grad.norm();
    if aset.active.is_empty() {
        let kkt_ok = gnorm <= kkt_tol * (1.0 + gnorm);
        return KktReport {
            multipliers: Vec::new(),
            kkt_residual: gnorm,
            kkt_ok,
            fit_failed: false,
            sc_holds: kkt_ok,
            min_active_multiplier: f64::INFINITY,
        };
    }
    let p = aset.active.len();
    let d = problem.dim();
    // Columns of At are the active constraint normals.
    let mut at = Matrix::zeros(d, p);
    for (c, &j) in aset.active.iter().enumerate() {
        for i in 0..d {
            at[(i, c)] = problem.feasible.a()[(j, i)];
        }
    }
    let svd = nalgebra::SVD::new(at.clone(), true, true);
    let mu = svd.solve(&(-&grad), 1e-12).unwrap_or_else(|_| Vector::zeros(p));
    let clamp = NEG_MULT_TOL * (1.0 + gnorm);
    let mut fit_failed = false;
    let mut clamped = Vector::zeros(p);
    for i in 0..p {
        if mu[i] < -clamp {
            fit_failed = true;
            clamped[i] = 0.0;
        } else {
            clamped[i] = mu[i].max(0.0);
        }
    }
    let residual = (&grad + &at * &clamped).norm();
    let kkt_ok = residual <= kkt_tol * (1.0 + gnorm);
    let min_mult = (0..p).map(|i| clamped[i]).fold(f64::INFINITY, f64::min);
    KktReport {
        multipliers: aset.active.iter().copied().zip(clamped.iter().copied()).collect(),
        kkt_residual: residual,
        kkt_ok,
        fit_failed,
        sc_holds: kkt_ok && !fit_failed && min_mult > SC_TOL,
        min_active_multiplier: min_mult,
    }
}

/// Full first/second-order stationarity report at a point.
#[derive(Debug, Clone)]
pub struct StationarityReport {
    pub fosp1_gap: f64,
    /// `None` encodes the vacuous case `dim F(x) = 0`.
    pub restricted_min_eig: Option<f64>,
    pub sosp1: bool,
    pub eps_g: f64,
    pub eps_h: f64,
    pub active_count: usize,
    pub free_dim: usize,
    pub kkt: KktReport,
}

impl StationarityReport {
    pub fn human(&self) -> String {
        let eig = match self.restricted_min_eig {
            Some(l) => format!("{l:.6e}"),
            None => "vacuous (free space is trivial)".into(),
        };
        let mut s = String::new();
        s.push_str(&format!("fosp1 gap |g_pi|      : {:.6e}\n", self.fosp1_gap));
        s.push_str(&format!("restricted min eig    : {eig}\n"));
        s.push_str(&format!(
            "sosp1 (eps_G={:.1e}, eps_H={:.1e}): {}\n",
            self.eps_g, self.eps_h, self.sosp1
        ));
        s.push_str(&format!("active constraints    : {}\n", self.active_count));
        s.push_str(&format!("free-space dimension  : {}\n", self.free_dim));
        s.push_str(&format!("kkt residual          : {:.6e}\n", self.kkt.kkt_residual));
        if self.kkt.kkt_ok {
            for (j, mu) in &self.kkt.multipliers {
                s.push_str(&format!("  mu[{j}] = {mu:.6e}\n"));
            }
        }
        s.push_str(&format!(
            "strict complementarity: {} (min active multiplier {:.3e})\n",
            self.kkt.sc_holds, self.kkt.min_active_multiplier
        ));
        s
    }

    pub fn csv_header() -> &'static str {
        "fosp1_gap,restricted_min_eig,sosp1,active_count,free_dim,kkt_residual,sc_holds,min_active_multiplier"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{},{},{},{},{:.12e},{},{}",
            self.fosp1_gap,
            self.restricted_min_eig.map_or(String::new(), |l| format!("{l:.12e}")),
            self.sosp1,
            self.active_count,
            self.free_dim,
            self.kkt.kkt_residual,
            self.kkt.sc_holds,
            if self.kkt.min_active_multiplier.is_finite() {
                format!("{:.12e}", self.kkt.min_active_multiplier)
            } else {
                "inf".into()
            }
        )
    }
}

/// Check the `(eps_G, eps_H)` first-kind conditions at `x`. `alpha` is the
/// proximal-gradient step; `None` uses `1/L1` to match the solver.
pub fn check_sosp1(
    problem: &ProblemInstance,
    x: &Vector,
    eps_g: f64,
    eps_h: f64,
    alpha: Option<f64>,
) -> Result<StationarityReport> {
    let alpha = alpha.unwrap_or(1.0 / problem.l1());
    let gap = prox_gradient(problem, x, alpha)?.norm();
    let aset = problem.feasible.active_set(x, ACTIVE_TOL)?;
    let basis = FreeSpaceBasis::new(&problem.feasible, &aset, RANK_TOL);
    let min_eig = restricted_min_eig(problem, &basis, x)?;
    let second_ok = match min_eig {
        None => true,
        Some((l, _)) => l >= -eps_h,
    };
    let kkt = kkt_and_sc(problem, x, &aset, KKT_TOL);
    Ok(StationarityReport {
        fosp1_gap: gap,
        restricted_min_eig: min_eig.map(|(l, _)| l),
        sosp1: gap <= eps_g && second_ok,
        eps_g,
        eps_h,
        active_count: aset.active.len(),
        free_dim: basis.k(),
        kkt,
    })
}

/// Brute-force second-kind check on tiny instances.
#[derive(Debug, Clone)]
pub struct Sosp2Report {
    pub fosp2: bool,
    pub sosp2: bool,
    /// Most violating feasible point, when a violation was found.
    pub witness: Option<Vector>,
    /// Quadratic form `(x - x*)^T hess (x - x*)` at the witness.
    pub witness_form: f64,
    /// Minimum of `grad^T (x - x*)` over the unit ball intersected with the
    /// feasible set.
    pub linear_min: f64,
}

/// Largest instance dimension accepted by the brute-force check.
pub const SOSP2_DIM_CAP: usize = 4;

/// Check the second-kind conditions by grid search (plus vertex enumeration
/// for the linear part). Deliberately a desk-scale oracle: the first-kind
/// gap is cheap to certify, the second-kind one is NP-hard in general.
///
/// The linear condition is minimized over the Euclidean unit ball around
/// `x`; the quadratic condition is evaluated on feasible grid points of the
/// box `x +- 1` whose direction is orthogonal to the gradient within
/// `1e-6 |grad| + 1e-9`.
pub fn check_sosp2_bruteforce(
    problem: &ProblemInstance,
    x: &Vector,
    eps_g: f64,
    eps_h: f64,
    grid_n: usize,
) -> Result<Sosp2Report> {
    let d = problem.dim();
    if d > SOSP2_DIM_CAP {
        return Err(Error::DimensionCap { dim: d, cap: SOSP2_DIM_CAP });
    }
    if grid_n < 2 {
        return Err(Error::InvalidParameter("grid_n must be at least 2".into()));
    }
    let grad = problem.grad(x);
    let gnorm = grad.norm();
    let ortho_tol = 1e-6 * gnorm + 1e-9;
    let hess: Vec<Vector> = (0..d)
        .map(|i| {
            let mut e = Vector::zeros(d);
            e[i] = 1.0;
            problem.hess_vec(x, &e)
        })
        .collect();
    let form = |y: &Vector| -> f64 {
        (0..d).map(|i| y[i] * hess[i].dot(y)).sum()
    };

    let mut linear_min = 0.0f64;
    let mut linear_argmin: Option<Vector> = None;
    let mut quad_min = 0.0f64;
    let mut quad_argmin: Option<Vector> = None;

    // Grid: per-coordinate offsets 2j/grid_n - 1, j = 0..=grid_n. Includes 0
    // so directions that keep active coordinates tight are represented
    // exactly.
    let offsets: Vec<f64> = (0..=grid_n).map(|j| 2.0 * j as f64 / grid_n as f64 - 1.0).collect();
    let mut idx = vec![0usize; d];
    loop {
        let y = Vector::from_fn(d, |i, _| offsets[idx[i]]);
        let point = x + &y;
        if problem.feasible.is_feasible(&point, 1e-12) {
            let lin = grad.dot(&y);
            if y.norm() <= 1.0 && lin < linear_min {
                linear_min = lin;
                linear_argmin = Some(point.clone());
            }
            if lin.abs() <= ortho_tol {
                let q = form(&y);
                if q < quad_min {
                    quad_min = q;
                    quad_argmin = Some(point.clone());
                }
            }
        }
        // odometer
        let mut c = 0;
        loop {
            idx[c] += 1;
            if idx[c] <= grid_n {
                break;
            }
            idx[c] = 0;
            c += 1;
            if c == d {
                break;
            }
        }
        if c == d {
            break;
        }
    }

    // Vertex enumeration refines the linear minimum: the minimum of a linear
    // function over the ball-capped feasible set is approached along
    // feasible vertices.
    for vertex in enumerate_vertices(problem) {
        let y = &vertex - x;
        let norm = y.norm();
        if norm <= 1e-12 {
            continue;
        }
        let y = if norm > 1.0 { y / norm } else { y };
        let lin = grad.dot(&y);
        if lin < linear_min {
            linear_min = lin;
            linear_argmin = Some(x + &y);
        }
    }
    // Steepest feasible ball direction, when feasible.
    if gnorm > 0.0 {
        let y = -&grad / gnorm;
        if problem.feasible.is_feasible(&(x + &y), 1e-12) {
            let lin = grad.dot(&y);
            if lin < linear_min {
                linear_min = lin;
                linear_argmin = Some(x + &y);
            }
        }
    }

    let fosp2 = linear_min >= -eps_g;
    let quad_ok = quad_min >= -eps_h;
    let witness = if !quad_ok { quad_argmin } else if !fosp2 { linear_argmin } else { None };
    Ok(Sosp2Report { fosp2, sosp2: fosp2 && quad_ok, witness, witness_form: quad_min, linear_min })
}

/// All vertices of the polyhedron: feasible solutions of `d` active rows.
fn enumerate_vertices(problem: &ProblemInstance) -> Vec<Vector> {
    let a = problem.feasible.a();
    let b = problem.feasible.b();
    let d = problem.dim();
    let m = problem.feasible.num_constraints();
    let mut vertices = Vec::new();
    if m < d {
        return vertices;
    }
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let mut sys = Matrix::zeros(d, d);
        let mut rhs = Vector::zeros(d);
        for (r, &j) in subset.iter().enumerate() {
            for i in 0..d {
                sys[(r, i)] = a[(j, i)];
            }
            rhs[r] = b[j];
        }
        if let Some(sol) = sys.lu().solve(&rhs) {
            if problem.feasible.is_feasible(&sol, 1e-9) {
                vertices.push(sol);
            }
        }
        // next d-combination of [0, m)
        let mut i = d;
        loop {
            if i == 0 {
                return vertices;
            }
            i -= 1;
            if subset[i] != i + m - d {
                subset[i] += 1;
                for j in i + 1..d {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{example1, make_problem, perturb_with, ProblemKind};
    use crate::Matrix;
    use approx::assert_relative_eq;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    fn half_norm_problem(dim: usize) -> ProblemInstance {
        // f = 0.5 |x|^2 over the nonnegative orthant
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::identity(dim, dim),
                c: Vector::zeros(dim),
                lower: Vector::zeros(dim),
                upper: Vector::from_element(dim, 1e6),
            },
            0,
        )
        .unwrap();
        p
    }

    #[test]
    fn prox_gradient_projects_origin() {
        let p = half_norm_problem(2);
        let g = prox_gradient(&p, &vec2(1.0, 1.0), 1.0).unwrap();
        assert_relative_eq!(g[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(g[1], -1.0, epsilon = 1e-12);
        assert_relative_eq!(g.norm(), 2.0f64.sqrt(), epsilon = 1e-12);
        let g0 = prox_gradient(&p, &vec2(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(g0.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn prox_gradient_zero_at_example1_origin() {
        let p = example1();
        for alpha in [0.1, 0.25, 1.0] {
            let g = prox_gradient(&p, &vec2(0.0, 0.0), alpha).unwrap();
            assert_relative_eq!(g.norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn projected_gradient_cases() {
        let p = example1();
        // both constraints active at the origin: P = 0
        let x = vec2(0.0, 0.0);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
        assert_eq!(basis.k(), 0);
        assert_relative_eq!(projected_gradient(&p, &basis, &x).norm(), 0.0);

        // interior: q_pi = grad f
        let x = vec2(0.5, 0.5);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
        let q = projected_gradient(&p, &basis, &x);
        assert_relative_eq!((q - p.grad(&x)).norm(), 0.0, epsilon = 1e-12);

        // one active coordinate: P = diag(0, 1)
        let hp = half_norm_problem(2);
        let x = vec2(0.0, 0.5);
        let aset = hp.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let basis = FreeSpaceBasis::new(&hp.feasible, &aset, RANK_TOL);
        let q = projected_gradient(&hp, &basis, &x);
        assert_relative_eq!(q[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(q[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn restricted_eig_one_active_constraint() {
        let p = example1();
        let x = vec2(0.5, 0.0);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
        assert_eq!(basis.k(), 1);
        let (l, v) = restricted_min_eig(&p, &basis, &x).unwrap().unwrap();
        assert_relative_eq!(l, -2.0, epsilon = 1e-12);
        assert_relative_eq!(v[0].abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(v[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn restricted_eig_unconstrained_diagonal() {
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = make_problem(
            ProblemKind::BoxQp {
                q,
                c: Vector::zeros(2),
                lower: Vector::from_element(2, -1e9),
                upper: Vector::from_element(2, 1e9),
            },
            0,
        )
        .unwrap();
        let x = vec2(0.0, 0.0);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
        let (l, v) = restricted_min_eig(&p, &basis, &x).unwrap().unwrap();
        assert_relative_eq!(l, -1.0, epsilon = 1e-12);
        assert_relative_eq!(v[1].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn restricted_eig_vacuous_at_example1_origin() {
        let p = example1();
        let x = vec2(0.0, 0.0);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
        assert!(restricted_min_eig(&p, &basis, &x).unwrap().is_none());
    }

    #[test]
    fn sosp1_example1_origin_true() {
        let p = example1();
        let rep = check_sosp1(&p, &vec2(0.0, 0.0), 1e-9, 1e-9, None).unwrap();
        assert!(rep.sosp1);
        assert!(rep.restricted_min_eig.is_none());
    }

    #[test]
    fn sosp1_interior_nonstationary_false() {
        let p = example1();
        let rep = check_sosp1(&p, &vec2(0.5, 0.5), 1e-3, 1e-3, None).unwrap();
        assert!(!rep.sosp1);
        assert!(rep.fosp1_gap > 1e-3);
    }

    #[test]
    fn sosp1_convex_minimum_true() {
        // min of 0.5 |x|^2 + c^T x over the box, c >= 0 puts it at the origin
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::identity(2, 2),
                c: vec2(0.5, 0.25),
                lower: Vector::zeros(2),
                upper: Vector::from_element(2, 1.0),
            },
            0,
        )
        .unwrap();
        let rep = check_sosp1(&p, &vec2(0.0, 0.0), 1e-9, 1e-9, None).unwrap();
        assert!(rep.sosp1);
    }

    #[test]
    fn kkt_example1_origin_sc_fails_unperturbed() {
        let p = example1();
        let x = vec2(0.0, 0.0);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let rep = kkt_and_sc(&p, &x, &aset, KKT_TOL);
        assert!(rep.kkt_ok);
        assert!(!rep.sc_holds);
        assert_relative_eq!(rep.min_active_multiplier, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kkt_example1_perturbed_sc_holds() {
        let p = perturb_with(&example1(), vec2(0.1, 0.1)).unwrap();
        let x = vec2(0.0, 0.0);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        let rep = kkt_and_sc(&p, &x, &aset, KKT_TOL);
        assert!(rep.kkt_ok);
        assert!(rep.sc_holds);
        for &(_, mu) in &rep.multipliers {
            assert_relative_eq!(mu, 0.1, epsilon = 1e-10);
        }
    }

    #[test]
    fn kkt_interior_stationary_vacuous() {
        // unconstrained-looking interior point of a convex QP at its minimum
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::identity(2, 2),
                c: vec2(-0.5, -0.5),
                lower: Vector::zeros(2),
                upper: Vector::from_element(2, 1.0),
            },
            0,
        )
        .unwrap();
        let x = vec2(0.5, 0.5);
        let aset = p.feasible.active_set(&x, ACTIVE_TOL).unwrap();
        assert!(aset.active.is_empty());
        let rep = kkt_and_sc(&p, &x, &aset, KKT_TOL);
        assert!(rep.kkt_ok && rep.sc_holds);
        assert!(rep.min_active_multiplier.is_infinite());
        assert_relative_eq!(rep.kkt_residual, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sosp2_example1_origin_false_with_corner_witness() {
        let p = example1();
        let rep = check_sosp2_bruteforce(&p, &vec2(0.0, 0.0), 1e-6, 1e-6, 64).unwrap();
        assert!(rep.fosp2);
        assert!(!rep.sosp2);
        assert!(rep.witness_form <= -2.0 + 1e-6);
        let w = rep.witness.unwrap();
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(w[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(rep.witness_form, -4.0, epsilon = 1e-9);
    }

    #[test]
    fn sosp2_convex_minimum_true() {
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::identity(2, 2),
                c: vec2(0.5, 0.25),
                lower: Vector::zeros(2),
                upper: Vector::from_element(2, 1.0),
            },
            0,
        )
        .unwrap();
        let rep = check_sosp2_bruteforce(&p, &vec2(0.0, 0.0), 1e-6, 1e-6, 64).unwrap();
        assert!(rep.fosp2 && rep.sosp2);
    }

    #[test]
    fn sosp2_example1_perturbed_true() {
        let p = perturb_with(&example1(), vec2(0.1, 0.1)).unwrap();
        let rep = check_sosp2_bruteforce(&p, &vec2(0.0, 0.0), 1e-6, 1e-6, 64).unwrap();
        assert!(rep.fosp2);
        assert!(rep.sosp2);
    }

    #[test]
    fn sosp2_respects_dimension_cap() {
        let p = make_problem(
            ProblemKind::Nmf { n: 3, m: 2, k: 1, factor_zero_frac: 0.0 },
            0,
        )
        .unwrap();
        assert!(p.dim() > SOSP2_DIM_CAP);
        let x = Vector::zeros(p.dim());
        assert!(matches!(
            check_sosp2_bruteforce(&p, &x, 1e-6, 1e-6, 8),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn projected_gradient_never_longer_than_gradient() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = half_norm_problem(4);
        for _ in 0..200 {
            let x = Vector::from_fn(4, |_, _| rng.gen::<f64>().max(0.0));
            let aset = p.feasible.active_set(&x, 1e-6).unwrap();
            let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
            let q = projected_gradient(&p, &basis, &x);
            assert!(q.norm() <= p.grad(&x).norm() + 1e-10);
        }
    }
}
