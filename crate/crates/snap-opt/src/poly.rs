//! Polyhedral feasible sets `{x : Ax <= b}`: active sets, free-space
//! projectors, Euclidean projection and maximum feasible steps.
//!
//! A [`Polyhedron`] may carry a structural tag so that projection and
//! active-set queries dispatch to closed forms (componentwise clamping for
//! the nonnegative orthant and boxes, a sort-based algorithm for simplex
//! blocks). Untagged sets fall back to dual coordinate ascent over the
//! constraint multipliers.

use crate::{Error, Matrix, Result, Vector};

/// Relative tolerance used to decide constraint activity.
pub const ACTIVE_TOL: f64 = 1e-9;
/// Singular values below `RANK_TOL * sigma_max` are treated as zero when
/// building a null-space basis.
pub const RANK_TOL: f64 = 1e-10;
/// Feasibility slack allowed on iterates produced by the solvers.
pub const FEAS_TOL: f64 = 1e-8;
/// Default convergence tolerance for Euclidean projections.
pub const PROJ_TOL: f64 = 1e-9;

/// Structural tag enabling closed-form dispatch. Validated against `(A, b)`
/// at construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Generic,
    /// `x >= 0`, encoded as `-I x <= 0`.
    NonnegOrthant,
    /// `lower <= x <= upper`, encoded as the `d` upper-bound rows followed by
    /// the `d` lower-bound rows.
    AxisBox { lower: Vector, upper: Vector },
    /// `blocks` consecutive blocks of length `block_len`, each constrained to
    /// the probability simplex `{v >= 0, sum v = 1}`. Encoded as the `d`
    /// nonnegativity rows followed by an opposing inequality pair per block.
    SimplexProduct { block_len: usize, blocks: usize },
}

#[derive(Debug, Clone)]
pub struct Polyhedron {
    a: Matrix,
    b: Vector,
    structure: Structure,
}

/// Partition of the constraint indices at a query point.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    pub active: Vec<usize>,
    pub inactive: Vec<usize>,
    pub tol: f64,
}

/// Result of a maximum-feasible-step query along a direction.
#[derive(Debug, Clone, Copy)]
pub struct MaxStep {
    pub alpha_max: f64,
    /// Inactive constraint that becomes active at `alpha_max`, when bounded.
    pub hit: Option<usize>,
    /// False when the ray never leaves the feasible set; `alpha_max` then
    /// carries the `1/L1` fallback.
    pub bounded: bool,
}

impl Polyhedron {
    /// Generic polyhedron from explicit `(A, b)`.
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Shape(format!(
                "A has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.ncols() == 0 {
            return Err(Error::Shape("polyhedron dimension must be at least 1".into()));
        }
        Ok(Self { a, b, structure: Structure::Generic })
    }

    /// `x >= 0` in dimension `dim`.
    pub fn nonneg_orthant(dim: usize) -> Self {
        let a = -Matrix::identity(dim, dim);
        let b = Vector::zeros(dim);
        Self { a, b, structure: Structure::NonnegOrthant }
    }

    /// Axis-aligned box `lower <= x <= upper`.
    pub fn axis_box(lower: Vector, upper: Vector) -> Result<Self> {
        let d = lower.len();
        if upper.len() != d {
            return Err(Error::Shape("box bound lengths differ".into()));
        }
        if (0..d).any(|i| lower[i] > upper[i]) {
            return Err(Error::InvalidParameter("box has lower > upper".into()));
        }
        let mut a = Matrix::zeros(2 * d, d);
        let mut b = Vector::zeros(2 * d);
        for i in 0..d {
            a[(i, i)] = 1.0;
            b[i] = upper[i];
            a[(d + i, i)] = -1.0;
            b[d + i] = -lower[i];
        }
        Ok(Self { a, b, structure: Structure::AxisBox { lower, upper } })
    }

    /// Product of `blocks` probability simplices, each of length `block_len`.
    /// The equality `sum v = 1` is encoded as an opposing inequality pair.
    pub fn simplex_product(block_len: usize, blocks: usize) -> Self {
        let d = block_len * blocks;
        let m = d + 2 * blocks;
        let mut a = Matrix::zeros(m, d);
        let mut b = Vector::zeros(m);
        for i in 0..d {
            a[(i, i)] = -1.0;
        }
        for j in 0..blocks {
            for i in 0..block_len {
                a[(d + 2 * j, j * block_len + i)] = 1.0;
                a[(d + 2 * j + 1, j * block_len + i)] = -1.0;
            }
            b[d + 2 * j] = 1.0;
            b[d + 2 * j + 1] = -1.0;
        }
        Self { a, b, structure: Structure::SimplexProduct { block_len, blocks } }
    }

    /// Attach a structural tag to explicit data, validating that `(A, b)`
    /// actually encode the claimed structure.
    pub fn with_structure(a: Matrix, b: Vector, structure: Structure) -> Result<Self> {
        let candidate = Self { a, b, structure: Structure::Generic };
        let reference = match &structure {
            Structure::Generic => return Ok(candidate),
            Structure::NonnegOrthant => Self::nonneg_orthant(candidate.dim()),
            Structure::AxisBox { lower, upper } => Self::axis_box(lower.clone(), upper.clone())?,
            Structure::SimplexProduct { block_len, blocks } => {
                Self::simplex_product(*block_len, *blocks)
            }
        };
        let same = candidate.a.shape() == reference.a.shape()
            && (&candidate.a - &reference.a).amax() <= 1e-12
            && (&candidate.b - &reference.b).amax() <= 1e-12;
        if !same {
            return Err(Error::InvalidParameter(
                "structural tag does not match the supplied (A, b)".into(),
            ));
        }
        Ok(Self { structure, ..candidate })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Worst constraint violation `max_j (A_j x - b_j)` and its index.
    /// Returns `(0, -inf)` when there are no constraints.
    pub fn worst_violation(&self, x: &Vector) -> (usize, f64) {
        let mut worst = (0usize, f64::NEG_INFINITY);
        let ax = &self.a * x;
        for j in 0..self.num_constraints() {
            let v = ax[j] - self.b[j];
            if v > worst.1 {
                worst = (j, v);
            }
        }
        worst
    }

    /// Violation magnitude only, via the structural fast path when one
    /// exists. Nonpositive values mean feasible.
    pub fn violation(&self, x: &Vector) -> f64 {
        match &self.structure {
            Structure::NonnegOrthant => x.iter().fold(f64::NEG_INFINITY, |acc, &t| acc.max(-t)),
            Structure::AxisBox { lower, upper } => (0..x.len())
                .fold(f64::NEG_INFINITY, |acc, i| acc.max(x[i] - upper[i]).max(lower[i] - x[i])),
            Structure::SimplexProduct { block_len, blocks } => {
                let mut worst = x.iter().fold(f64::NEG_INFINITY, |acc, &t| acc.max(-t));
                for j in 0..*blocks {
                    let s: f64 = (0..*block_len).map(|i| x[j * block_len + i]).sum();
                    worst = worst.max((s - 1.0).abs());
                }
                worst
            }
            Structure::Generic => self.worst_violation(x).1,
        }
    }

    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        let ax = &self.a * x;
        (0..self.num_constraints()).all(|j| ax[j] - self.b[j] <= tol * (1.0 + self.b[j].abs()))
    }

    /// Partition the constraints into active and inactive sets at `x`.
    /// A constraint is active when `|A_j x - b_j| <= tol (1 + |b_j|)`.
    pub fn active_set(&self, x: &Vector, tol: f64) -> Result<ActiveSet> {
        let ax = &self.a * x;
        let mut active = Vec::new();
        let mut inactive = Vec::new();
        for j in 0..self.num_constraints() {
            let resid = ax[j] - self.b[j];
            let scale = 1.0 + self.b[j].abs();
            if resid > tol * scale {
                return Err(Error::Infeasible { index: j, violation: resid });
            }
            if resid.abs() <= tol * scale {
                active.push(j);
            } else {
                inactive.push(j);
            }
        }
        Ok(ActiveSet { active, inactive, tol })
    }

    /// Number of active constraints at `x`, via the structural fast path when
    /// one exists.
    pub fn active_count(&self, x: &Vector, tol: f64) -> usize {
        match &self.structure {
            Structure::NonnegOrthant => (0..x.len()).filter(|&i| x[i].abs() <= tol).count(),
            Structure::AxisBox { lower, upper } => (0..x.len())
                .map(|i| {
                    let mut c = 0;
                    if (x[i] - upper[i]).abs() <= tol * (1.0 + upper[i].abs()) {
                        c += 1;
                    }
                    if (x[i] - lower[i]).abs() <= tol * (1.0 + lower[i].abs()) {
                        c += 1;
                    }
                    c
                })
                .sum(),
            Structure::SimplexProduct { block_len, blocks } => {
                let zeros = (0..x.len()).filter(|&i| x[i].abs() <= tol).count();
                let mut sums = 0;
                for j in 0..*blocks {
                    let s: f64 = (0..*block_len).map(|i| x[j * block_len + i]).sum();
                    if (s - 1.0).abs() <= 2.0 * tol {
                        sums += 2;
                    }
                }
                zeros + sums
            }
            Structure::Generic => self
                .active_set(x, tol)
                .map(|aset| aset.active.len())
                .unwrap_or(0),
        }
    }

    /// Euclidean projection onto the feasible set.
    pub fn project(&self, v: &Vector, tol: f64) -> Result<Vector> {
        match &self.structure {
            Structure::NonnegOrthant => Ok(v.map(|t| t.max(0.0))),
            Structure::AxisBox { lower, upper } => {
                Ok(Vector::from_fn(v.len(), |i, _| v[i].clamp(lower[i], upper[i])))
            }
            Structure::SimplexProduct { block_len, blocks } => {
                let mut out = v.clone();
                for j in 0..*blocks {
                    let start = j * block_len;
                    let proj = project_simplex(&v.as_slice()[start..start + block_len]);
                    out.as_mut_slice()[start..start + block_len].copy_from_slice(&proj);
                }
                Ok(out)
            }
            Structure::Generic => self.project_hildreth(v, tol),
        }
    }

    /// Dual coordinate ascent over the constraint multipliers (Hildreth).
    /// The update budget is `10 m d (-log10 tol)` single-constraint steps.
    fn project_hildreth(&self, v: &Vector, tol: f64) -> Result<Vector> {
        let m = self.num_constraints();
        if m == 0 {
            return Ok(v.clone());
        }
        let row_sq: Vec<f64> = (0..m).map(|j| self.a.row(j).norm_squared()).collect();
        let mut x = v.clone();
        let mut lambda = vec![0.0; m];
        let scale = 1.0 + v.norm();
        let max_sweeps =
            (10.0 * m as f64 * self.dim() as f64 * (-tol.log10()).max(1.0)).ceil() as usize / m + 1;
        let scaled_violation = |x: &Vector| -> f64 {
            let ax = &self.a * x;
            (0..m)
                .map(|j| (ax[j] - self.b[j]) / (1.0 + self.b[j].abs()))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        // relaxation in (0, 2) keeps the sweep convergent and speeds up
        // near-parallel constraint pairs considerably
        let omega = 1.5;
        for _ in 0..max_sweeps {
            let mut moved = 0.0f64;
            for j in 0..m {
                if row_sq[j] <= f64::MIN_POSITIVE {
                    continue;
                }
                let resid = self.a.row(j).dot(&x.transpose()) - self.b[j];
                let delta = (omega * resid / row_sq[j]).max(-lambda[j]);
                if delta != 0.0 {
                    lambda[j] += delta;
                    for i in 0..self.dim() {
                        x[i] -= delta * self.a[(j, i)];
                    }
                    moved = moved.max(delta.abs() * row_sq[j].sqrt());
                }
            }
            if moved <= tol * scale && scaled_violation(&x) <= tol {
                return Ok(x);
            }
        }
        let worst = scaled_violation(&x);
        if worst <= tol.max(1e-7) {
            return Ok(x);
        }
        Err(Error::ProjectionFailure { iters: max_sweeps, residual: worst })
    }

    /// Largest step `alpha >= 0` with `x + alpha d` feasible. When no
    /// inactive constraint bounds the ray, returns the `1/L1` fallback with
    /// `bounded = false`.
    pub fn max_step(
        &self,
        aset: &ActiveSet,
        x: &Vector,
        dir: &Vector,
        l1: f64,
    ) -> Result<MaxStep> {
        let free_norm: f64 = aset
            .active
            .iter()
            .map(|&j| self.a.row(j).dot(&dir.transpose()))
            .map(|t| t * t)
            .sum::<f64>()
            .sqrt();
        if free_norm > 1e-8 * dir.norm().max(1.0) {
            return Err(Error::NotInFreeSpace { norm: free_norm });
        }
        let mut best: Option<(f64, usize)> = None;
        for &i in &aset.inactive {
            let denom = self.a.row(i).dot(&dir.transpose());
            if denom > 0.0 {
                let ratio = (self.b[i] - self.a.row(i).dot(&x.transpose())) / denom;
                if ratio > 0.0 && best.map_or(true, |(r, _)| ratio < r) {
                    best = Some((ratio, i));
                }
            }
        }
        Ok(match best {
            Some((alpha_max, hit)) => MaxStep { alpha_max, hit: Some(hit), bounded: true },
            None => MaxStep { alpha_max: 1.0 / l1, hit: None, bounded: false },
        })
    }

    /// Snap a nearly-feasible point exactly onto closed-form boundaries.
    /// Clamps roundoff-scale violations produced by stepping to `alpha_max`;
    /// untagged polyhedra are returned unchanged.
    pub fn snap_feasible(&self, x: Vector) -> Vector {
        match &self.structure {
            Structure::NonnegOrthant => x.map(|t| if t < 0.0 { 0.0 } else { t }),
            Structure::AxisBox { lower, upper } => {
                Vector::from_fn(x.len(), |i, _| x[i].clamp(lower[i], upper[i]))
            }
            _ => x,
        }
    }

    /// Serialize as the plain-text format: header `m d`, then `m` rows of
    /// `d + 1` numbers (`A_j` followed by `b_j`).
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.num_constraints(), self.dim());
        for j in 0..self.num_constraints() {
            for i in 0..self.dim() {
                s.push_str(&format!("{:.17e} ", self.a[(j, i)]));
            }
            s.push_str(&format!("{:.17e}\n", self.b[j]));
        }
        s
    }

    /// Parse the plain-text format produced by [`Polyhedron::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let m: usize = next_num(&mut tokens)? as usize;
        let d: usize = next_num(&mut tokens)? as usize;
        if d == 0 {
            return Err(Error::Parse("polyhedron dimension must be positive".into()));
        }
        let mut a = Matrix::zeros(m, d);
        let mut b = Vector::zeros(m);
        for j in 0..m {
            for i in 0..d {
                a[(j, i)] = next_num(&mut tokens)?;
            }
            b[j] = next_num(&mut tokens)?;
        }
        Self::new(a, b)
    }
}

fn next_num<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<f64> {
    let tok = tokens.next().ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    tok.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{tok}`")))
}

/// Sort-based Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&t| (t - tau).max(0.0)).collect()
}

/// Orthonormal basis `Z` of the free space `Null(A'(x))`.
///
/// The implied projector is `P = Z Z^T`. Built with a rank-revealing
/// factorization so duplicated or linearly dependent active rows do not
/// inflate the rank.
#[derive(Debug, Clone)]
pub struct FreeSpaceBasis {
    z: Matrix,
    /// Free coordinate indices when the basis is axis-aligned; projection
    /// and lifting then cost O(d) instead of a dense multiply.
    axis_free: Option<Vec<usize>>,
    pub rank_tol: f64,
}

impl FreeSpaceBasis {
    /// Basis from an explicit orthonormal column matrix (tests and hand
    /// construction).
    pub fn from_columns(z: Matrix, rank_tol: f64) -> Self {
        Self { z, axis_free: None, rank_tol }
    }

    pub fn new(poly: &Polyhedron, aset: &ActiveSet, rank_tol: f64) -> Self {
        let d = poly.dim();
        if aset.active.is_empty() {
            return Self {
                z: Matrix::identity(d, d),
                axis_free: Some((0..d).collect()),
                rank_tol,
            };
        }
        if let Some((z, free)) = Self::axis_aligned(poly, aset) {
            return Self { z, axis_free: Some(free), rank_tol };
        }
        // General path: eigenvectors of A'^T A' with near-zero singular value
        // span the null space.
        let mut gram = Matrix::zeros(d, d);
        for &j in &aset.active {
            let row = poly.a().row(j);
            for p in 0..d {
                for q in 0..d {
                    gram[(p, q)] += row[p] * row[q];
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(gram);
        let sigma_max = eig.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.max(0.0))).sqrt();
        let cutoff = rank_tol * sigma_max;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].partial_cmp(&eig.eigenvalues[q]).unwrap());
        let null_cols: Vec<usize> = order
            .into_iter()
            .filter(|&p| eig.eigenvalues[p].max(0.0).sqrt() <= cutoff)
            .collect();
        let mut z = Matrix::zeros(d, null_cols.len());
        for (c, &p) in null_cols.iter().enumerate() {
            z.set_column(c, &eig.eigenvectors.column(p));
        }
        Self { z, axis_free: None, rank_tol }
    }

    /// Fast path when every active row is `±e_i`: the free space is spanned
    /// by the unpinned coordinates.
    fn axis_aligned(poly: &Polyhedron, aset: &ActiveSet) -> Option<(Matrix, Vec<usize>)> {
        match poly.structure() {
            Structure::NonnegOrthant | Structure::AxisBox { .. } => {}
            _ => return None,
        }
        let d = poly.dim();
        let mut pinned = vec![false; d];
        for &j in &aset.active {
            // Row j of an orthant is -e_j; of a box, ±e_{j mod d}.
            pinned[j % d] = true;
        }
        let free: Vec<usize> = (0..d).filter(|&i| !pinned[i]).collect();
        let mut z = Matrix::zeros(d, free.len());
        for (c, &i) in free.iter().enumerate() {
            z[(i, c)] = 1.0;
        }
        Some((z, free))
    }

    /// Free-space dimension `k`.
    pub fn k(&self) -> usize {
        self.z.ncols()
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    /// `P v = Z (Z^T v)`.
    pub fn project(&self, v: &Vector) -> Vector {
        if let Some(free) = &self.axis_free {
            let mut out = Vector::zeros(v.len());
            for &i in free {
                out[i] = v[i];
            }
            return out;
        }
        if self.k() == self.z.nrows() {
            return v.clone();
        }
        &self.z * (self.z.transpose() * v)
    }

    /// Lift free-space coordinates back to the ambient space: `Z y`.
    pub fn lift(&self, y: &Vector) -> Vector {
        if let Some(free) = &self.axis_free {
            let mut out = Vector::zeros(self.z.nrows());
            for (c, &i) in free.iter().enumerate() {
                out[i] = y[c];
            }
            return out;
        }
        &self.z * y
    }

    /// Dense projector `P = Z Z^T` (for tests and small instances).
    pub fn projector(&self) -> Matrix {
        &self.z * self.z.transpose()
    }
}
