//! Nearest-subspace search on the Grassmann manifold.
//!
//! A database holds `N` subspaces of a common dimension `m` inside an
//! ambient space of dimension `D`, each represented by an orthonormal
//! `D x m` basis. The crate offers two ways to answer "which stored
//! subspace is closest to a query subspace?":
//!
//! * **Exact scans** over principal-angle measures (geodesic distance,
//!   projection metric, projection kernel and its exponential variant),
//!   see [`grassmann`].
//! * **A column-level approximate engine** that reduces the subspace
//!   problem to Euclidean nearest-neighbor queries over the individual
//!   basis columns, see [`engine`] on top of the pluggable vector
//!   indexes in [`ann`].
//!
//! Two classical alternatives — the quadratic lift of projection
//! matrices and a hyperplane-arrangement hash over subspaces — live in
//! [`baselines`] for comparison.
//!
//! All floating-point work is plain `f64`; every routine is
//! deterministic for a fixed seed and input order.

pub mod ann;
pub mod baselines;
pub mod engine;
pub mod grassmann;
pub mod linalg;

pub use grassmann::{Measure, Subspace, SubspaceDB, SubspaceId};
pub use linalg::Matrix;
