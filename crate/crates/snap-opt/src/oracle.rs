//! Objective oracles: value, gradient and Hessian-vector access for the
//! problem zoo, plus finite-difference verification and the random linear
//! perturbation used to restore strict complementarity.
//!
//! Variable layouts are frozen. Factor matrices are stacked column-major:
//!
//! - `nmf` / `penalized-nmf`: `x = [vec(W); vec(H)]`, `W` is `n x k`,
//!   `H` is `m x k`, data `M` is `n x m`;
//! - `sym-nmf-simplex`: `x = vec(H)`, `H` is `n x k` with each column on the
//!   probability simplex;
//! - `two-layer-nn`: `x = [vec(W); vec(H)]`, `W` is `k_out x hidden`,
//!   `H` is `features x hidden`, fitting `Y = W sigma(H^T X)`;
//! - QPs: `x` is the ambient variable.

use crate::poly::Polyhedron;
use crate::{Error, Matrix, Result, Vector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Smooth objective with analytic first- and second-order access.
#[derive(Debug, Clone)]
pub enum Objective {
    /// `f(x) = 0.5 x^T Q x + c^T x` with symmetric `Q`.
    Qp { q: Matrix, c: Vector },
    /// `f(W, H) = |W H^T - M|_F^2`.
    Nmf { m_data: Matrix, n: usize, m: usize, k: usize },
    /// NMF plus `rho/2 * sum_j ((1^T h_j)^2 - |h_j|^2)` over the columns of `H`.
    PenalizedNmf { m_data: Matrix, n: usize, m: usize, k: usize, rho: f64 },
    /// `f(H) = |H H^T - M|_F^2` with symmetric `M`.
    SymNmfSimplex { m_data: Matrix, n: usize, k: usize },
    /// `f(W, H) = |W sigma(H^T X) - Y|_F^2` with sigmoid activation.
    TwoLayerNn { x_data: Matrix, y_data: Matrix, features: usize, samples: usize, outputs: usize, hidden: usize },
    /// `f(x) = 0.5 x^T Q x + (l2/6) |x|^3`; cubic term has known Hessian
    /// Lipschitz constant `l2`.
    CubicReg { q: Matrix, l2: f64 },
    /// `f(x) + q^T x` around an inner objective.
    Perturbed { inner: Box<Objective>, q: Vector },
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Objective {
    pub fn dim(&self) -> usize {
        match self {
            Objective::Qp { q, .. } => q.nrows(),
            Objective::Nmf { n, m, k, .. } => (n + m) * k,
            Objective::PenalizedNmf { n, m, k, .. } => (n + m) * k,
            Objective::SymNmfSimplex { n, k, .. } => n * k,
            Objective::TwoLayerNn { features, outputs, hidden, .. } => {
                (outputs + features) * hidden
            }
            Objective::CubicReg { q, .. } => q.nrows(),
            Objective::Perturbed { inner, .. } => inner.dim(),
        }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        match self {
            Objective::Qp { q, c } => 0.5 * x.dot(&(q * x)) + c.dot(x),
            Objective::Nmf { m_data, n, m, k } => {
                let (w, h) = split_two(x, *n, *m, *k);
                (&w * h.transpose() - m_data).norm_squared()
            }
            Objective::PenalizedNmf { m_data, n, m, k, rho } => {
                let (w, h) = split_two(x, *n, *m, *k);
                let fit = (&w * h.transpose() - m_data).norm_squared();
                let pen: f64 = (0..*k)
                    .map(|j| {
                        let col = h.column(j);
                        let s: f64 = col.iter().sum();
                        s * s - col.norm_squared()
                    })
                    .sum();
                fit + 0.5 * rho * pen
            }
            Objective::SymNmfSimplex { m_data, n, k } => {
                let h = Matrix::from_column_slice(*n, *k, x.as_slice());
                (&h * h.transpose() - m_data).norm_squared()
            }
            Objective::TwoLayerNn { x_data, y_data, features, outputs, hidden, .. } => {
                let (w, h) = split_nn(x, *outputs, *features, *hidden);
                let s = (h.transpose() * x_data).map(sigmoid);
                (&w * s - y_data).norm_squared()
            }
            Objective::CubicReg { q, l2 } => {
                0.5 * x.dot(&(q * x)) + l2 / 6.0 * x.norm().powi(3)
            }
            Objective::Perturbed { inner, q } => inner.eval(x) + q.dot(x),
        }
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        match self {
            Objective::Qp { q, c } => q * x + c,
            Objective::Nmf { m_data, n, m, k } => {
                let (w, h) = split_two(x, *n, *m, *k);
                let e = &w * h.transpose() - m_data;
                stack_two(&(2.0 * &e * &h), &(2.0 * e.transpose() * &w))
            }
            Objective::PenalizedNmf { m_data, n, m, k, rho } => {
                let (w, h) = split_two(x, *n, *m, *k);
                let e = &w * h.transpose() - m_data;
                let gw = 2.0 * &e * &h;
                let mut gh = 2.0 * e.transpose() * &w;
                for j in 0..*k {
                    let col = h.column(j);
                    let s: f64 = col.iter().sum();
                    for i in 0..*m {
                        gh[(i, j)] += rho * (s - col[i]);
                    }
                }
                stack_two(&gw, &gh)
            }
            Objective::SymNmfSimplex { m_data, n, k } => {
                let h = Matrix::from_column_slice(*n, *k, x.as_slice());
                let e = &h * h.transpose() - m_data;
                let g = 4.0 * e * h;
                Vector::from_column_slice(g.as_slice())
            }
            Objective::TwoLayerNn { x_data, y_data, features, outputs, hidden, .. } => {
                let (w, h) = split_nn(x, *outputs, *features, *hidden);
                let z = h.transpose() * x_data;
                let s = z.map(sigmoid);
                let r = &w * &s - y_data;
                let gw = 2.0 * &r * s.transpose();
                let t = (w.transpose() * (2.0 * r)).component_mul(&s.map(|v| v * (1.0 - v)));
                let gh = x_data * t.transpose();
                stack_two(&gw, &gh)
            }
            Objective::CubicReg { q, l2 } => {
                let norm = x.norm();
                q * x + (l2 / 2.0 * norm) * x
            }
            Objective::Perturbed { inner, q } => inner.grad(x) + q,
        }
    }

    pub fn has_hess_vec(&self) -> bool {
        match self {
            Objective::Perturbed { inner, .. } => inner.has_hess_vec(),
            _ => true,
        }
    }

    /// Directional second derivative `hess(x) v`, exact for every kind.
    pub fn hess_vec(&self, x: &Vector, v: &Vector) -> Vector {
        match self {
            Objective::Qp { q, .. } => q * v,
            Objective::Nmf { m_data, n, m, k } => {
                let (w, h) = split_two(x, *n, *m, *k);
                let (u, t) = split_two(v, *n, *m, *k);
                let e = &w * h.transpose() - m_data;
                let de = &u * h.transpose() + &w * t.transpose();
                stack_two(
                    &(2.0 * (&de * &h + &e * &t)),
                    &(2.0 * (de.transpose() * &w + e.transpose() * &u)),
                )
            }
            Objective::PenalizedNmf { m_data, n, m, k, rho } => {
                let (w, h) = split_two(x, *n, *m, *k);
                let (u, t) = split_two(v, *n, *m, *k);
                let e = &w * h.transpose() - m_data;
                let de = &u * h.transpose() + &w * t.transpose();
                let hw = 2.0 * (&de * &h + &e * &t);
                let mut hh = 2.0 * (de.transpose() * &w + e.transpose() * &u);
                for j in 0..*k {
                    let col = t.column(j);
                    let s: f64 = col.iter().sum();
                    for i in 0..*m {
                        hh[(i, j)] += rho * (s - col[i]);
                    }
                }
                stack_two(&hw, &hh)
            }
            Objective::SymNmfSimplex { m_data, n, k } => {
                let h = Matrix::from_column_slice(*n, *k, x.as_slice());
                let t = Matrix::from_column_slice(*n, *k, v.as_slice());
                let e = &h * h.transpose() - m_data;
                let de = &t * h.transpose() + &h * t.transpose();
                let g = 4.0 * (de * h + e * t);
                Vector::from_column_slice(g.as_slice())
            }
            Objective::TwoLayerNn { x_data, y_data, features, outputs, hidden, .. } => {
                let (w, h) = split_nn(x, *outputs, *features, *hidden);
                let (vw, vh) = split_nn(v, *outputs, *features, *hidden);
                let z = h.transpose() * x_data;
                let s = z.map(sigmoid);
                let sp = s.map(|t| t * (1.0 - t));
                let spp = s.map(|t| t * (1.0 - t) * (1.0 - 2.0 * t));
                let r = &w * &s - y_data;
                let dz = vh.transpose() * x_data;
                let ds = sp.component_mul(&dz);
                let dr = &vw * &s + &w * &ds;
                let hw = 2.0 * (&dr * s.transpose() + &r * ds.transpose());
                let dt = (vw.transpose() * (2.0 * &r) + w.transpose() * (2.0 * &dr))
                    .component_mul(&sp)
                    + (w.transpose() * (2.0 * &r)).component_mul(&spp.component_mul(&dz));
                let hh = x_data * dt.transpose();
                stack_two(&hw, &hh)
            }
            Objective::CubicReg { q, l2 } => {
                let norm = x.norm();
                if norm == 0.0 {
                    q * v
                } else {
                    q * v + (l2 / 2.0) * (norm * v + (x.dot(v) / norm) * x)
                }
            }
            Objective::Perturbed { inner, .. } => inner.hess_vec(x, v),
        }
    }

    /// Conservative Lipschitz bounds `(L1, L2)` valid on the ball of the
    /// given radius. QPs are exact and radius-independent; the factorization
    /// objectives use crude product-of-norms bounds.
    pub fn lipschitz_bounds(&self, radius: f64) -> (f64, f64) {
        match self {
            Objective::Qp { q, .. } => (spectral_norm(q), f64::EPSILON),
            Objective::Nmf { m_data, .. } => {
                let mn = m_data.norm();
                (3.0 * radius * radius + 2.0 * mn, 6.0 * radius)
            }
            Objective::PenalizedNmf { m_data, m, rho, .. } => {
                let mn = m_data.norm();
                (3.0 * radius * radius + 2.0 * mn + rho * *m as f64, 6.0 * radius)
            }
            Objective::SymNmfSimplex { m_data, .. } => {
                let mn = m_data.norm();
                (12.0 * radius * radius + 4.0 * mn, 24.0 * radius)
            }
            Objective::TwoLayerNn { x_data, y_data, samples, hidden, .. } => {
                let xn = x_data.norm();
                let yn = y_data.norm();
                let sn = ((hidden * samples) as f64).sqrt();
                let l1 = 2.0 * (sn + 0.25 * radius * xn).powi(2)
                    + 2.0 * (radius * sn + yn) * (0.25 * xn + 0.1 * radius * xn * xn);
                let l2 = 2.0 * (1.0 + radius * xn).powi(3);
                (l1, l2)
            }
            Objective::CubicReg { q, l2 } => (spectral_norm(q) + l2 * radius, *l2),
            Objective::Perturbed { inner, .. } => inner.lipschitz_bounds(radius),
        }
    }
}

fn spectral_norm(q: &Matrix) -> f64 {
    nalgebra::SymmetricEigen::new(q.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()))
}

/// Sampled `(L1, L2)` at the data scale: power-iterated Hessian norms over
/// seeded feasible points, and Hessian differences along random segments,
/// each inflated by a safety factor of 3.
fn sampled_lipschitz(objective: &Objective, feasible: &Polyhedron, scale: f64) -> (f64, f64) {
    use rand::Rng as _;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A3C_11E5);
    let d = objective.dim();
    let mut l1_raw = 0.0f64;
    let mut l2_raw = 0.0f64;
    for _ in 0..8 {
        let raw = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)) * scale
            / (d as f64).sqrt();
        let x = match feasible.project(&raw, 1e-8) {
            Ok(x) => x,
            Err(_) => continue,
        };
        // a few power steps push a random direction toward the top of the
        // Hessian spectrum at x
        let mut v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        v /= v.norm();
        for _ in 0..6 {
            let hv = objective.hess_vec(&x, &v);
            let norm = hv.norm();
            l1_raw = l1_raw.max(norm);
            if norm <= 1e-280 {
                break;
            }
            v = hv / norm;
        }
        // Hessian variation along a random segment bounds L2 from below
        let mut u = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        u /= u.norm();
        let delta = 0.1 * scale.max(1.0);
        let y = &x + delta * &u;
        let w = {
            let mut w = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            w /= w.norm();
            w
        };
        let dh = (objective.hess_vec(&y, &w) - objective.hess_vec(&x, &w)).norm() / delta;
        l2_raw = l2_raw.max(dh);
    }
    (3.0 * l1_raw.max(1e-6), 3.0 * l2_raw.max(1e-6))
}

fn split_two(x: &Vector, n: usize, m: usize, k: usize) -> (Matrix, Matrix) {
    let w = Matrix::from_column_slice(n, k, &x.as_slice()[..n * k]);
    let h = Matrix::from_column_slice(m, k, &x.as_slice()[n * k..]);
    (w, h)
}

fn split_nn(x: &Vector, outputs: usize, features: usize, hidden: usize) -> (Matrix, Matrix) {
    let w = Matrix::from_column_slice(outputs, hidden, &x.as_slice()[..outputs * hidden]);
    let h = Matrix::from_column_slice(features, hidden, &x.as_slice()[outputs * hidden..]);
    (w, h)
}

/// Stack two matrices column-major into one variable vector.
pub fn stack_two(a: &Matrix, b: &Matrix) -> Vector {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a.as_slice());
    v.extend_from_slice(b.as_slice());
    Vector::from_vec(v)
}

/// An objective paired with its feasible set and Lipschitz estimates.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub objective: Objective,
    pub feasible: Polyhedron,
    pub name: String,
    /// `(x*, f*)` when the generating data admits a known optimum.
    pub known_optimum: Option<(Vector, f64)>,
    l1: f64,
    l2: f64,
    /// Ball radius on which the Lipschitz bounds were computed;
    /// infinity for QPs.
    pub lipschitz_radius: f64,
}

impl ProblemInstance {
    pub fn new(objective: Objective, feasible: Polyhedron, name: impl Into<String>) -> Result<Self> {
        if objective.dim() != feasible.dim() {
            return Err(Error::Shape(format!(
                "objective dimension {} != feasible-set dimension {}",
                objective.dim(),
                feasible.dim()
            )));
        }
        // QPs and the cubic test objective have tight analytic constants.
        // The factorization objectives use sampled curvature bounds at the
        // data scale (times a safety factor): their global polynomial-ball
        // bounds overshoot by orders of magnitude, which would cripple every
        // step that defaults to 1/L1.
        let (l1, l2, radius) = match &objective {
            Objective::Qp { .. } => {
                let (l1, l2) = objective.lipschitz_bounds(f64::INFINITY);
                (l1, l2, f64::INFINITY)
            }
            Objective::CubicReg { .. } => {
                let radius = 100.0;
                let (l1, l2) = objective.lipschitz_bounds(radius);
                (l1, l2, radius)
            }
            Objective::Perturbed { inner, .. } => {
                let base =
                    ProblemInstance::new((**inner).clone(), feasible.clone(), "inner")?;
                (base.l1, base.l2, base.lipschitz_radius)
            }
            _ => {
                let scale = match &objective {
                    Objective::Nmf { m_data, .. }
                    | Objective::PenalizedNmf { m_data, .. }
                    | Objective::SymNmfSimplex { m_data, .. } => 2.0 * (1.0 + m_data.norm().sqrt()),
                    Objective::TwoLayerNn { y_data, .. } => 2.0 * (1.0 + y_data.norm().sqrt()),
                    _ => unreachable!(),
                };
                let (l1, l2) = sampled_lipschitz(&objective, &feasible, scale);
                (l1, l2, 5.0 * scale)
            }
        };
        Ok(Self { objective, feasible, name: name.into(), known_optimum: None, l1, l2, lipschitz_radius: radius })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn f(&self, x: &Vector) -> f64 {
        self.objective.eval(x)
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        self.objective.grad(x)
    }

    pub fn hess_vec(&self, x: &Vector, v: &Vector) -> Vector {
        self.objective.hess_vec(x, v)
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// Recompute the Lipschitz bounds on a larger ball; used by the solver
    /// when iterates leave the original one.
    pub fn lipschitz_at_radius(&self, radius: f64) -> (f64, f64) {
        self.objective.lipschitz_bounds(radius)
    }
}

/// Named constructors for [`make_problem`].
#[derive(Debug, Clone)]
pub enum ProblemKind {
    /// `|W H^T - M|^2` over `W, H >= 0`; `M = W0 H0^T` with `U[0,1]` factors
    /// and `factor_zero_frac` of the generating factor entries zeroed, so the
    /// data stays exactly factorable.
    Nmf { n: usize, m: usize, k: usize, factor_zero_frac: f64 },
    /// `|H H^T - M|^2` over per-column probability simplices.
    SymNmfSimplex { n: usize, k: usize },
    /// NMF with the column-coherence penalty `rho`.
    PenalizedNmf { n: usize, m: usize, k: usize, rho: f64 },
    /// `|W sigma(H^T X) - Y|^2` over `W, H >= 0`, sigmoid activation.
    TwoLayerNn { samples: usize, features: usize, outputs: usize, hidden: usize },
    /// Explicit QP over a box.
    BoxQp { q: Matrix, c: Vector, lower: Vector, upper: Vector },
    /// Seeded indefinite QP over a random polyhedron containing the origin.
    RandomQp { dim: usize, constraints: usize },
}

/// Build a seeded problem instance of the given kind.
pub fn make_problem(kind: ProblemKind, seed: u64) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        ProblemKind::Nmf { n, m, k, factor_zero_frac } => {
            if n == 0 || m == 0 || k == 0 {
                return Err(Error::InvalidParameter("nmf shapes must be positive".into()));
            }
            let (w0, h0) = nmf_factors(&mut rng, n, m, k, factor_zero_frac);
            let m_data = &w0 * h0.transpose();
            let mut p = ProblemInstance::new(
                Objective::Nmf { m_data, n, m, k },
                Polyhedron::nonneg_orthant((n + m) * k),
                format!("nmf-{n}x{m}-k{k}"),
            )?;
            p.known_optimum = Some((stack_two(&w0, &h0), 0.0));
            Ok(p)
        }
        ProblemKind::SymNmfSimplex { n, k } => {
            if n == 0 || k == 0 {
                return Err(Error::InvalidParameter("shapes must be positive".into()));
            }
            let mut h0 = Matrix::zeros(n, k);
            for j in 0..k {
                let mut col: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = col.iter().sum();
                col.iter_mut().for_each(|v| *v /= s);
                for i in 0..n {
                    h0[(i, j)] = col[i];
                }
            }
            let m_data = &h0 * h0.transpose();
            let mut p = ProblemInstance::new(
                Objective::SymNmfSimplex { m_data, n, k },
                Polyhedron::simplex_product(n, k),
                format!("sym-nmf-simplex-{n}-k{k}"),
            )?;
            p.known_optimum = Some((Vector::from_column_slice(h0.as_slice()), 0.0));
            Ok(p)
        }
        ProblemKind::PenalizedNmf { n, m, k, rho } => {
            if rho < 0.0 {
                return Err(Error::InvalidParameter("rho must be nonnegative".into()));
            }
            let (w0, h0) = nmf_factors(&mut rng, n, m, k, 0.0);
            let m_data = &w0 * h0.transpose();
            ProblemInstance::new(
                Objective::PenalizedNmf { m_data, n, m, k, rho },
                Polyhedron::nonneg_orthant((n + m) * k),
                format!("penalized-nmf-{n}x{m}-k{k}"),
            )
        }
        ProblemKind::TwoLayerNn { samples, features, outputs, hidden } => {
            let x_data = Matrix::from_fn(features, samples, |_, _| rng.gen::<f64>());
            let w_star = Matrix::from_fn(outputs, hidden, |_, _| rng.gen::<f64>());
            let h_star = Matrix::from_fn(features, hidden, |_, _| rng.gen::<f64>());
            let y_data = &w_star * (h_star.transpose() * &x_data).map(sigmoid);
            let mut p = ProblemInstance::new(
                Objective::TwoLayerNn { x_data, y_data, features, samples, outputs, hidden },
                Polyhedron::nonneg_orthant((outputs + features) * hidden),
                format!("two-layer-nn-{samples}x{features}-k{outputs}-h{hidden}"),
            )?;
            p.known_optimum = Some((stack_two(&w_star, &h_star), 0.0));
            Ok(p)
        }
        ProblemKind::BoxQp { q, c, lower, upper } => {
            let d = q.nrows();
            if q.ncols() != d || c.len() != d {
                return Err(Error::Shape("QP data shapes disagree".into()));
            }
            if (&q - q.transpose()).amax() > 1e-10 * (1.0 + q.amax()) {
                return Err(Error::InvalidParameter("Q must be symmetric".into()));
            }
            ProblemInstance::new(
                Objective::Qp { q, c },
                Polyhedron::axis_box(lower, upper)?,
                format!("box-qp-{d}"),
            )
        }
        ProblemKind::RandomQp { dim, constraints } => {
            let g = Matrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let q = (&g + g.transpose()) * 0.5;
            let c = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut a = Matrix::zeros(constraints, dim);
            let mut b = Vector::zeros(constraints);
            for j in 0..constraints {
                let mut row = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = row.norm();
                if norm > 0.0 {
                    row /= norm;
                }
                for i in 0..dim {
                    a[(j, i)] = row[i];
                }
                b[j] = 0.2 + 0.8 * rng.gen::<f64>(); // origin strictly feasible
            }
            ProblemInstance::new(
                Objective::Qp { q, c },
                Polyhedron::new(a, b)?,
                format!("random-qp-{dim}m{constraints}"),
            )
        }
    }
}

fn nmf_factors(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    k: usize,
    factor_zero_frac: f64,
) -> (Matrix, Matrix) {
    let mut w0 = Matrix::from_fn(n, k, |_, _| rng.gen::<f64>());
    let mut h0 = Matrix::from_fn(m, k, |_, _| rng.gen::<f64>());
    let total = (n + m) * k;
    let zeros = (factor_zero_frac * total as f64).floor() as usize;
    for _ in 0..zeros {
        let idx = rng.gen_range(0..total);
        if idx < n * k {
            w0[(idx % n, idx / n)] = 0.0;
        } else {
            let idx = idx - n * k;
            h0[(idx % m, idx / m)] = 0.0;
        }
    }
    (w0, h0)
}

/// The box QP of the motivating example: `f = -x1^2 - x2^2` on `[0, 1]^2`.
/// The origin satisfies the first-kind second-order conditions but not the
/// second-kind ones.
pub fn example1() -> ProblemInstance {
    let q = Matrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -2.0]);
    let c = Vector::zeros(2);
    let mut p = make_problem(
        ProblemKind::BoxQp {
            q,
            c,
            lower: Vector::zeros(2),
            upper: Vector::from_vec(vec![1.0, 1.0]),
        },
        0,
    )
    .expect("example1 data is well-formed");
    p.name = "example1".into();
    p.known_optimum = Some((Vector::from_vec(vec![1.0, 1.0]), -2.0));
    p
}

/// Add a fixed linear term `q^T x` to the objective.
pub fn perturb_with(problem: &ProblemInstance, q: Vector) -> Result<ProblemInstance> {
    if q.len() != problem.dim() {
        return Err(Error::Shape("perturbation length differs from dimension".into()));
    }
    let mut p = ProblemInstance::new(
        Objective::Perturbed { inner: Box::new(problem.objective.clone()), q },
        problem.feasible.clone(),
        format!("{}+q", problem.name),
    )?;
    p.lipschitz_radius = problem.lipschitz_radius;
    Ok(p)
}

/// Add a seeded random linear term rescaled to `|q| = q_scale`. The
/// direction is standard normal componentwise; `q_scale = 0` leaves the
/// objective unchanged.
pub fn perturb_linear(problem: &ProblemInstance, q_scale: f64, seed: u64) -> Result<ProblemInstance> {
    if q_scale < 0.0 {
        return Err(Error::InvalidParameter("q_scale must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = Vector::from_fn(problem.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = q.norm();
    if q_scale == 0.0 || norm == 0.0 {
        q.fill(0.0);
    } else {
        q *= q_scale / norm;
    }
    perturb_with(problem, q)
}

/// Finite-difference verification report; failures are reported, not thrown.
#[derive(Debug, Clone)]
pub struct FdReport {
    pub max_grad_rel_err: f64,
    pub max_hess_rel_err: f64,
    pub points_checked: usize,
    pub step: f64,
}

/// Compare the analytic gradient against central differences of the value,
/// and the Hessian-vector product against central differences of the
/// gradient, over feasible sample points.
pub fn fd_verify(problem: &ProblemInstance, n_points: usize, h: f64, seed: u64) -> Result<FdReport> {
    if h <= 0.0 {
        return Err(Error::InvalidParameter("finite-difference step must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.dim();
    let mut max_grad = 0.0f64;
    let mut max_hess = 0.0f64;
    for _ in 0..n_points {
        let raw = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = problem.feasible.project(&raw, crate::poly::PROJ_TOL)?;
        let g = problem.grad(&x);
        let mut fd = Vector::zeros(d);
        for i in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (problem.f(&xp) - problem.f(&xm)) / (2.0 * h);
        }
        max_grad = max_grad.max((&g - &fd).norm() / g.norm().max(1.0));

        for _ in 0..3 {
            let mut v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = v.norm();
            if norm == 0.0 {
                continue;
            }
            v /= norm;
            let hv = problem.hess_vec(&x, &v);
            let gp = problem.grad(&(&x + h * &v));
            let gm = problem.grad(&(&x - h * &v));
            let fd_hv = (gp - gm) / (2.0 * h);
            max_hess = max_hess.max((&hv - &fd_hv).norm() / hv.norm().max(1.0));
        }
    }
    Ok(FdReport { max_grad_rel_err: max_grad, max_hess_rel_err: max_hess, points_checked: n_points, step: h })
}
