//! Negative-eigen-pair oracles.
//!
//! Both oracles either certify (up to failure probability `delta`) that the
//! restricted Hessian has no eigenvalue below `-eps_h`, or return a unit
//! direction of certified negative curvature inside the free space:
//!
//! - [`negative_eigen_pair_hessian`] runs shifted power iteration on the
//!   restricted operator `Z^T hess Z`, using Hessian-vector products;
//! - [`sp_gd`] extracts curvature from gradient differences alone
//!   (subspace perturbed gradient descent), with the free-space projector
//!   frozen at the anchor point.

use crate::oracle::ProblemInstance;
use crate::poly::FreeSpaceBasis;
use crate::stationarity::projected_gradient;
use crate::{Error, Matrix, Result, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Outcome of a negative-eigen-pair query.
#[derive(Debug, Clone)]
pub struct EigenPairResult {
    /// True when a certified negative-curvature direction was found.
    pub found: bool,
    /// Unit direction in the free space; zero when nothing was found.
    pub direction: Vector,
    /// Certified curvature value `-eps_h'(delta) <= 0`; zero when nothing
    /// was found.
    pub curvature_estimate: f64,
    /// Gradient / Hessian-vector / value oracle calls consumed.
    pub evals_used: usize,
}

impl EigenPairResult {
    fn none(dim: usize, evals_used: usize) -> Self {
        Self { found: false, direction: Vector::zeros(dim), curvature_estimate: 0.0, evals_used }
    }
}

/// Hessian-based oracle: shifted power iteration on `M = Z^T hess(x) Z`
/// with shift `L1`, accepting when the final Rayleigh quotient is at most
/// `-eps_h / 2`.
pub fn negative_eigen_pair_hessian(
    problem: &ProblemInstance,
    x: &Vector,
    basis: &FreeSpaceBasis,
    eps_h: f64,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> EigenPairResult {
    let d = problem.dim();
    let k = basis.k();
    if k == 0 {
        return EigenPairResult::none(d, 0);
    }
    let mut m = Matrix::zeros(k, k);
    for j in 0..k {
        let zj: Vector = basis.z().column(j).into();
        let hz = problem.hess_vec(x, &zj);
        m.set_column(j, &(basis.z().transpose() * hz));
    }
    let m = (&m + m.transpose()) * 0.5;
    let l1 = problem.l1();
    // Any shift at or above the spectrum midpoint makes the smallest
    // eigenvalue dominant for the power method. A quick power estimate of
    // lambda_max gives a far better-conditioned shift than a conservative
    // L1 bound, which can exceed the spectrum by orders of magnitude.
    let shift = estimate_lambda_max(&m, rng).mul_add(1.05, 0.5 * eps_h).min(l1);

    // Iteration budget from the power-method bound; in practice the
    // Rayleigh quotient stabilizes long before it is exhausted.
    let budget = ((8.0 * l1 / eps_h) * ((k as f64 / delta).ln().max(1.0)))
        .ceil()
        .clamp(64.0, 5e5) as usize;

    let mut y = random_unit(k, rng);
    let mut rayleigh = y.dot(&(&m * &y));
    let mut stable = 0;
    for it in 0..budget {
        let mut next = shift * &y - &m * &y;
        let norm = next.norm();
        if norm <= 1e-280 {
            // landed in the kernel of the shifted operator; re-seed
            next = random_unit(k, rng);
        } else {
            next /= norm;
        }
        y = next;
        if it % 8 == 7 {
            let r = y.dot(&(&m * &y));
            if (r - rayleigh).abs() <= 1e-12 * (1.0 + r.abs()) {
                stable += 1;
                if stable >= 3 {
                    rayleigh = r;
                    break;
                }
            } else {
                stable = 0;
            }
            rayleigh = r;
        } else {
            rayleigh = y.dot(&(&m * &y));
        }
    }
    if rayleigh <= -eps_h / 2.0 {
        let mut dir = basis.lift(&y);
        let norm = dir.norm();
        if norm > 0.0 {
            dir /= norm;
        }
        EigenPairResult { found: true, direction: dir, curvature_estimate: rayleigh, evals_used: k }
    } else {
        EigenPairResult::none(d, k)
    }
}

/// SP-GD configuration. The theory-mode constants come from
/// [`default_spgd_config`]; experiment presets set them manually and mark
/// `practical_override`.
#[derive(Debug, Clone)]
pub struct SpGdConfig {
    /// Inner iteration count `T`.
    pub t: usize,
    /// Descent threshold (script F).
    pub script_f: f64,
    /// Initialization radius (script R).
    pub script_r: f64,
    /// Step size `beta`.
    pub beta: f64,
    /// Constant `c_hat`, at least 51 in theory mode.
    pub c_hat: f64,
    pub eps_h: f64,
    pub delta: f64,
    /// True when T / script_f / script_r were set manually rather than by
    /// the theory formulas; the certified curvature value is then heuristic.
    pub practical_override: bool,
}

impl SpGdConfig {
    /// Experiment-mode constants.
    pub fn practical(t: usize, script_r: f64, script_f: f64, beta: f64, eps_h: f64, delta: f64) -> Self {
        Self { t, script_f, script_r, beta, c_hat: 51.0, eps_h, delta, practical_override: true }
    }

    /// Certified curvature magnitude `eps_h / (4 c_hat log(d L1 / (eps_h delta)))`.
    pub fn curvature_estimate(&self, d: usize, l1: f64) -> f64 {
        let ln = log_term(d, l1, self.eps_h, self.delta);
        -self.eps_h / (4.0 * self.c_hat * ln)
    }
}

fn log_term(d: usize, l1: f64, eps_h: f64, delta: f64) -> f64 {
    ((d as f64) * l1 / (eps_h * delta)).max(std::f64::consts::E).ln()
}

/// Theory-mode SP-GD constants:
/// `beta = 1/L1`, `c_hat = 51`,
/// `T = ceil(c_hat log(d L1/(eps_H delta)) / (beta eps_H)) + 1`,
/// `F = eps_H^3 / (L2^2 c_hat^5 log^3(..))`,
/// `R = eps_H^2 / (L1 L2 c_hat^4 log^2(..))`.
pub fn default_spgd_config(l1: f64, l2: f64, d: usize, eps_h: f64, delta: f64) -> Result<SpGdConfig> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)".into()));
    }
    if eps_h <= 0.0 || l1 <= 0.0 {
        return Err(Error::InvalidParameter("eps_H and L1 must be positive".into()));
    }
    if eps_h > l1 {
        return Err(Error::InvalidParameter(format!("eps_H = {eps_h} must not exceed L1 = {l1}")));
    }
    let l2 = l2.max(f64::EPSILON);
    let beta = 1.0 / l1;
    let c_hat = 51.0;
    let ln = log_term(d, l1, eps_h, delta);
    let t = (c_hat * ln / (beta * eps_h)).ceil() as usize + 1;
    let script_f = eps_h.powi(3) / (l2 * l2 * c_hat.powi(5) * ln.powi(3));
    let script_r = eps_h * eps_h / (l1 * l2 * c_hat.powi(4) * ln * ln);
    Ok(SpGdConfig { t, script_f, script_r, beta, c_hat, eps_h, delta, practical_override: false })
}

/// Subspace perturbed gradient descent around the anchor `x`.
///
/// Starts from a uniform draw on the radius-`R` sphere of the free space and
/// iterates `z <- z - beta (q_pi(x + z) - q_pi(x))` with the projector
/// frozen at the anchor. The run stops as soon as the approximate descent
/// `f(x+z) - f(x) - q_pi(x)^T z` crosses `-1.5 F` (this is the stopping time
/// the guarantee is stated for; probes are not constrained to the feasible
/// set, feasibility of the eventual step is the line search's job).
pub fn sp_gd(
    problem: &ProblemInstance,
    x: &Vector,
    basis: &FreeSpaceBasis,
    cfg: &SpGdConfig,
    rng: &mut ChaCha8Rng,
) -> EigenPairResult {
    let d = problem.dim();
    if basis.k() == 0 {
        return EigenPairResult::none(d, 0);
    }
    let mut evals = 0usize;

    let mut z = Vector::zeros(d);
    for _ in 0..16 {
        let g = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        z = basis.project(&g);
        let norm = z.norm();
        if norm > 1e-260 {
            z *= cfg.script_r / norm;
            break;
        }
    }

    let f0 = problem.f(x);
    let q0 = projected_gradient(problem, basis, x);
    evals += 2;

    let estimate = cfg.curvature_estimate(d, problem.l1());
    // The run stops at the descent stopping time, but keeps amplifying while
    // the certified descent still improves: the first probe past the
    // threshold is barely separated from noise, and the extra power steps
    // purify the direction before higher-order terms turn it around.
    let mut best: Option<(f64, Vector)> = None;
    for _ in 0..cfg.t {
        let grad_probe = problem.grad(&(x + &z));
        evals += 1;
        let diff = basis.project(&grad_probe) - &q0;
        z -= cfg.beta * diff;
        if !z.iter().all(|t| t.is_finite()) {
            break;
        }
        let descent = problem.f(&(x + &z)) - f0 - q0.dot(&z);
        evals += 1;
        if descent <= -1.5 * cfg.script_f && best.as_ref().map_or(true, |(b, _)| descent < *b) {
            best = Some((descent, z.clone()));
        } else if best.is_some() {
            // past the turnaround; the previous probe was the deepest
            break;
        }
    }
    match best {
        Some((descent, z)) => {
            let norm = z.norm();
            if norm == 0.0 {
                return EigenPairResult::none(d, evals);
            }
            // In experiment mode the Theorem-style certified value can be
            // meaninglessly small; the descent that tripped the test implies
            // the sharper Rayleigh bound 2 (f(x+z) - f(x) - q^T z) / |z|^2,
            // which is what the direction selection and the line search get.
            let curvature_estimate = if cfg.practical_override {
                (2.0 * descent / (norm * norm)).min(estimate)
            } else {
                estimate
            };
            EigenPairResult { found: true, direction: z / norm, curvature_estimate, evals_used: evals }
        }
        None => EigenPairResult::none(d, evals),
    }
}

fn random_unit(k: usize, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let y = Vector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = y.norm();
        if norm > 1e-260 {
            return y / norm;
        }
    }
}

/// Upper estimate of `lambda_max(M)` by a short power iteration on `M`.
fn estimate_lambda_max(m: &Matrix, rng: &mut ChaCha8Rng) -> f64 {
    let k = m.nrows();
    let mut y = random_unit(k, rng);
    let mut best = y.dot(&(m * &y));
    for _ in 0..40 {
        let mut next = m * &y;
        let norm = next.norm();
        if norm <= 1e-280 {
            break;
        }
        next /= norm;
        y = next;
        best = best.max(y.dot(&(m * &y)));
    }
    best.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{example1, make_problem, ProblemInstance, ProblemKind};
    use crate::poly::{Polyhedron, ACTIVE_TOL, RANK_TOL};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn unconstrained_qp(diag: &[f64]) -> ProblemInstance {
        let d = diag.len();
        let mut q = Matrix::zeros(d, d);
        for i in 0..d {
            q[(i, i)] = diag[i];
        }
        ProblemInstance::new(
            crate::oracle::Objective::Qp { q, c: Vector::zeros(d) },
            Polyhedron::new(Matrix::zeros(0, d), Vector::zeros(0)).unwrap(),
            "diag-qp",
        )
        .unwrap()
    }

    fn full_basis(p: &ProblemInstance, x: &Vector) -> FreeSpaceBasis {
        let aset = p.feasible.active_set(x, ACTIVE_TOL).unwrap();
        FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL)
    }

    #[test]
    fn hessian_oracle_finds_negative_direction() {
        let p = unconstrained_qp(&[1.0, -1.0]);
        let x = Vector::zeros(2);
        let basis = full_basis(&p, &x);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = negative_eigen_pair_hessian(&p, &x, &basis, 0.5, 0.1, &mut rng);
        assert!(r.found);
        assert_relative_eq!(r.direction[1].abs(), 1.0, epsilon = 1e-6);
        assert_relative_eq!(r.curvature_estimate, -1.0, epsilon = 1e-6);
        assert_relative_eq!(r.direction.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn hessian_oracle_rejects_positive_definite() {
        let p = unconstrained_qp(&[1.0, 1.0, 1.0]);
        let x = Vector::zeros(3);
        let basis = full_basis(&p, &x);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = negative_eigen_pair_hessian(&p, &x, &basis, 0.5, 0.1, &mut rng);
        assert!(!r.found);
        assert_eq!(r.curvature_estimate, 0.0);
    }

    #[test]
    fn hessian_oracle_vacuous_when_free_space_trivial() {
        let p = example1();
        let x = Vector::zeros(2);
        let basis = full_basis(&p, &x);
        assert_eq!(basis.k(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = negative_eigen_pair_hessian(&p, &x, &basis, 1e-3, 0.1, &mut rng);
        assert!(!r.found);
        assert_eq!(r.evals_used, 0);
    }

    #[test]
    fn hessian_oracle_soundness_on_random_spectra() {
        // lambda_min <= -2 eps_h: must find curvature in >= 99 of 100 trials;
        // lambda_min >= 0: must never report curvature.
        let eps_h = 0.3;
        let mut found = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 2 + (seed as usize % 7);
            let mut diag: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
            diag[0] = -2.0 * eps_h - rng.gen_range(0.0..2.0);
            let p = unconstrained_qp(&diag);
            let x = Vector::zeros(k);
            let basis = full_basis(&p, &x);
            let r = negative_eigen_pair_hessian(&p, &x, &basis, eps_h, 0.1, &mut rng);
            if r.found {
                found += 1;
                let hv = p.hess_vec(&x, &r.direction);
                assert!(r.direction.dot(&hv) <= r.curvature_estimate + 1e-8);
            }
        }
        assert!(found >= 99, "found curvature in only {found}/100 trials");

        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 500);
            let k = 2 + (seed as usize % 7);
            let diag: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
            let p = unconstrained_qp(&diag);
            let x = Vector::zeros(k);
            let basis = full_basis(&p, &x);
            let r = negative_eigen_pair_hessian(&p, &x, &basis, eps_h, 0.1, &mut rng);
            assert!(!r.found);
        }
    }

    #[test]
    fn spgd_amplifies_negative_curvature() {
        let p = unconstrained_qp(&[1.0, -1.0]);
        let x = Vector::zeros(2);
        let basis = full_basis(&p, &x);
        let cfg = SpGdConfig::practical(40, 1e-3, 1e-6, 0.5, 0.5, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = sp_gd(&p, &x, &basis, &cfg, &mut rng);
        assert!(r.found);
        assert_relative_eq!(r.direction.norm(), 1.0, epsilon = 1e-10);
        let hv = p.hess_vec(&x, &r.direction);
        let rayleigh = r.direction.dot(&hv);
        assert!(rayleigh <= -0.9, "rayleigh quotient {rayleigh}");
        assert!(r.curvature_estimate < 0.0);
    }

    #[test]
    fn spgd_rejects_positive_definite() {
        let p = unconstrained_qp(&[1.0, 1.0]);
        let x = Vector::zeros(2);
        let basis = full_basis(&p, &x);
        let cfg = SpGdConfig::practical(60, 1e-3, 1e-6, 0.5, 0.5, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = sp_gd(&p, &x, &basis, &cfg, &mut rng);
        assert!(!r.found);
        assert_eq!(r.direction.norm(), 0.0);
    }

    #[test]
    fn spgd_is_deterministic_for_fixed_seed() {
        let p = unconstrained_qp(&[0.7, -0.9, 0.2]);
        let x = Vector::zeros(3);
        let basis = full_basis(&p, &x);
        let cfg = SpGdConfig::practical(50, 1e-3, 1e-8, 0.8, 0.5, 0.1);
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sp_gd(&p, &x, &basis, &cfg, &mut rng)
        };
        let a = run(42);
        let b = run(42);
        assert_eq!(a.found, b.found);
        assert_eq!(a.direction.as_slice(), b.direction.as_slice());
        assert_eq!(a.curvature_estimate.to_bits(), b.curvature_estimate.to_bits());
        let c = run(43);
        assert!(a.direction.as_slice() != c.direction.as_slice());
    }

    #[test]
    fn spgd_vacuous_on_trivial_free_space() {
        let p = example1();
        let x = Vector::zeros(2);
        let basis = full_basis(&p, &x);
        let cfg = SpGdConfig::practical(40, 1e-4, 1e-6, 0.25, 0.5, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = sp_gd(&p, &x, &basis, &cfg, &mut rng);
        assert!(!r.found);
        assert_eq!(r.evals_used, 0);
    }

    #[test]
    fn theory_config_matches_direct_formula_evaluation() {
        let cfg = default_spgd_config(1.0, 1.0, 10, 0.1, 0.1).unwrap();
        // Independent evaluation: log term ln(10 * 1 / (0.1 * 0.1)) = ln(1000).
        let ln = 1000.0f64.ln();
        assert_relative_eq!(ln, 6.907755278982137, epsilon = 1e-12);
        let t_expected = (51.0 * ln / 0.1).ceil() as usize + 1;
        assert_eq!(t_expected, 3524);
        assert_eq!(cfg.t, t_expected);
        let r_expected = 0.1f64.powi(2) / (1.0 * 1.0 * 51.0f64.powi(4) * ln * ln);
        assert_relative_eq!(cfg.script_r, r_expected, epsilon = 1e-15);
        assert_relative_eq!(cfg.script_r, 3.0977e-11, max_relative = 1e-3);
        let f_expected = 0.1f64.powi(3) / (51.0f64.powi(5) * ln.powi(3));
        assert_relative_eq!(cfg.script_f, f_expected, epsilon = 1e-15);
        assert!(!cfg.practical_override);
        assert_relative_eq!(cfg.beta, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn theory_config_rejects_bad_parameters() {
        assert!(default_spgd_config(1.0, 1.0, 10, 2.0, 0.1).is_err()); // eps_h > L1
        assert!(default_spgd_config(1.0, 1.0, 10, 0.1, 0.0).is_err());
        assert!(default_spgd_config(1.0, 1.0, 10, 0.1, 1.0).is_err());
    }

    #[test]
    fn spgd_directions_stay_in_free_space() {
        // anchor on a face of the box: one pinned coordinate
        let p = make_problem(
            ProblemKind::BoxQp {
                q: Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
                c: Vector::zeros(2),
                lower: Vector::zeros(2),
                upper: Vector::from_element(2, 1.0),
            },
            0,
        )
        .unwrap();
        let x = Vector::from_vec(vec![0.5, 0.0]);
        let basis = full_basis(&p, &x);
        assert_eq!(basis.k(), 1);
        let cfg = SpGdConfig::practical(60, 1e-4, 1e-9, 0.5, 0.5, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = sp_gd(&p, &x, &basis, &cfg, &mut rng);
        assert!(r.found);
        // the pinned coordinate never moves
        assert!(r.direction[1].abs() <= 1e-12);
        let a_active = p.feasible.a().row(3) * &r.direction; // row 3 = lower bound on x2
        assert!(a_active[(0, 0)].abs() <= 1e-8);
    }
}
