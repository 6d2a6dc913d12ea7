//! Curvature of Riemannian spaces given by a metric or by an immersion into
//! flat space, computed pointwise with truncated Taylor arithmetic.
//!
//! - [`expr`]: chart component expressions and their jets
//! - [`linalg`]: determinants, orthonormal frames, generalized eigenproblems
//! - [`geometry`]: metric, Christoffel symbols, Riemann tensor, normal frames
//! - [`curvature`]: the `kappa^2` invariant by the extrinsic and intrinsic routes
//! - [`subspaces`]: principal curvature directions of an immersed ambient
//! - [`batch`]: grids and (optionally parallel) evaluation over many points

pub mod batch;
pub mod curvature;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod subspaces;

pub use curvature::{kappa_report, CurvatureError, KappaReport, PivotPolicy};
pub use expr::{EvalError, Expr, Jet, ParseError};
pub use geometry::{Chart, GeometryError, ImmersionChart, MetricChart, NestedChart};
pub use linalg::{LinalgError, Matrix};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
