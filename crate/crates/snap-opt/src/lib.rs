//! Finding approximate second-order stationary points of smooth (possibly
//! non-convex) objectives over linear inequality constraints `{x : Ax <= b}`.
//!
//! The solver alternates projected gradient descent with negative-curvature
//! descent steps restricted to the free space of the active constraints
//! (SNAP), and optionally extracts curvature directions from gradient
//! differences alone (SNAP+ via the SP-GD oracle). Alongside the solvers the
//! crate ships:
//!
//! - polyhedral machinery: active sets, free-space projectors, Euclidean
//!   projection, maximum feasible step ([`poly`]);
//! - a zoo of objective oracles (NMF variants, a small non-linear network,
//!   quadratic programs) with analytic gradients and Hessian-vector products
//!   ([`oracle`]);
//! - stationarity measurement and certification: proximal-gradient gap,
//!   restricted Hessian spectrum, KKT multipliers, strict complementarity,
//!   and a brute-force second-kind check for tiny instances
//!   ([`stationarity`]);
//! - the two negative-eigen-pair oracles ([`eigen`]) and the feasible line
//!   search ([`linesearch`]);
//! - a benchmark harness with reproducible presets, trace CSVs and SVG plots
//!   ([`bench`]).
//!
//! All randomness flows through explicitly seeded generators; identical
//! inputs produce identical outputs.

pub mod bench;
pub mod eigen;
pub mod io;
pub mod linesearch;
pub mod oracle;
pub mod poly;
pub mod solver;
pub mod stationarity;

/// Dense column vector of `f64`, the working type throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix of `f64`.
pub type Matrix = nalgebra::DMatrix<f64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point is infeasible: constraint {index} violated by {violation:.6e}")]
    Infeasible { index: usize, violation: f64 },

    #[error("projection did not converge after {iters} sweeps (worst violation {residual:.6e})")]
    ProjectionFailure { iters: usize, residual: f64 },

    #[error("direction leaves the free space: |A' d| = {norm:.6e}")]
    NotInFreeSpace { norm: f64 },

    #[error(
        "line search reached the step floor {floor:.6e} without sufficient descent; \
         the supplied Lipschitz estimates are likely too small"
    )]
    LineSearchFloor { floor: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("objective provides no Hessian-vector product; use the sp-gd oracle instead")]
    NoHessian,

    #[error("dimension {dim} exceeds the brute-force cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
