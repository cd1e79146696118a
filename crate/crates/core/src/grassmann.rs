//! Subspaces with orthonormal bases and the distance measures between
//! them.
//!
//! A point on the Grassmann manifold G(m, D) is an m-dimensional
//! linear subspace of R^D, represented here by an orthonormal `D x m`
//! basis matrix. All measures between two subspaces derive from the
//! principal angles `θ_1 <= … <= θ_m`, whose cosines are the singular
//! values of the cross-Gram `Y_a^T Y_b`:
//!
//! * geodesic distance `sqrt(Σ θ_i²)`,
//! * projection metric `sqrt(Σ sin² θ_i) = sqrt(m - k_P)`,
//! * projection kernel `k_P = Σ cos² θ_i = |Y_a^T Y_b|_F²`,
//! * its exponential variant `exp(β k_P)`.
//!
//! The kernel needs no singular values at all — the Frobenius norm of
//! the cross-Gram gives it directly — which is exactly why kernel
//! scans are cheap compared to geodesic ones.

use crate::linalg::{self, Matrix};
use thiserror::Error;

/// Identifier of a stored subspace; consecutive from 1 within a
/// database.
pub type SubspaceId = u32;

/// Largest tolerated deviation of a basis from orthonormality at
/// construction time.
pub const BASIS_ORTHO_TOL: f64 = 1e-8;

/// Principal angles below this are treated as exactly zero by
/// [`geodesic_distance`]: two bases of the *same* span reproduce each
/// other's columns only to rounding, and without the snap the distance
/// between a subspace and itself would come out as ~1e-7 instead of 0.
pub const ANGLE_ZERO_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrassmannError {
    #[error("basis is not orthonormal (defect {defect:.3e}, tolerance {BASIS_ORTHO_TOL:.0e})")]
    NotOrthonormal { defect: f64 },
    #[error("subspace ids must be consecutive starting at 1: {0}")]
    BadIds(String),
    #[error("database contains no subspaces")]
    EmptyDatabase,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("kernel sharpness must be positive, got {0}")]
    InvalidBeta(f64),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// An m-dimensional subspace of R^D with its orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    id: SubspaceId,
    basis: Matrix,
}

impl Subspace {
    /// Wraps a basis after checking it is orthonormal within
    /// [`BASIS_ORTHO_TOL`]. Ids start at 1; 0 is reserved as "no id".
    pub fn new(id: SubspaceId, basis: Matrix) -> Result<Self, GrassmannError> {
        if id == 0 {
            return Err(GrassmannError::BadIds("id 0 is reserved".into()));
        }
        if basis.cols() == 0 || basis.cols() > basis.rows() {
            return Err(GrassmannError::DimensionMismatch(format!(
                "basis must be D x m with 1 <= m <= D, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        let defect = linalg::orthonormality_defect(&basis);
        if defect > BASIS_ORTHO_TOL {
            return Err(GrassmannError::NotOrthonormal { defect });
        }
        Ok(Subspace { id, basis })
    }

    #[inline]
    pub fn id(&self) -> SubspaceId {
        self.id
    }

    #[inline]
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Ambient dimension D.
    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Subspace dimension m.
    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }
}

/// A collection of subspaces sharing one (D, m), ids `1..=len`.
#[derive(Debug, Clone)]
pub struct SubspaceDB {
    subspaces: Vec<Subspace>,
    ambient_dim: usize,
    subspace_dim: usize,
}

impl SubspaceDB {
    /// Validates that all bases share one shape and that ids run
    /// consecutively `1, 2, …, len` in storage order.
    pub fn new(subspaces: Vec<Subspace>) -> Result<Self, GrassmannError> {
        let first = subspaces.first().ok_or(GrassmannError::EmptyDatabase)?;
        let (d, m) = (first.ambient_dim(), first.dim());
        for (pos, s) in subspaces.iter().enumerate() {
            if (s.ambient_dim(), s.dim()) != (d, m) {
                return Err(GrassmannError::DimensionMismatch(format!(
                    "subspace id {} is {}x{}, expected {}x{}",
                    s.id(),
                    s.ambient_dim(),
                    s.dim(),
                    d,
                    m
                )));
            }
            if s.id() as usize != pos + 1 {
                return Err(GrassmannError::BadIds(format!(
                    "found id {} at position {}, expected {}",
                    s.id(),
                    pos,
                    pos + 1
                )));
            }
        }
        Ok(SubspaceDB { subspaces, ambient_dim: d, subspace_dim: m })
    }

    /// Convenience constructor that assigns ids `1..` in input order.
    pub fn from_bases(bases: Vec<Matrix>) -> Result<Self, GrassmannError> {
        let subspaces = bases
            .into_iter()
            .enumerate()
            .map(|(i, b)| Subspace::new(i as SubspaceId + 1, b))
            .collect::<Result<Vec<_>, _>>()?;
        SubspaceDB::new(subspaces)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    /// Look up by id (ids are the 1-based storage positions).
    pub fn get(&self, id: SubspaceId) -> Option<&Subspace> {
        self.subspaces.get(id.checked_sub(1)? as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subspace> {
        self.subspaces.iter()
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    #[inline]
    pub fn subspace_dim(&self) -> usize {
        self.subspace_dim
    }
}

/// Principal angles between two subspaces, ascending, in `[0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngles {
    angles: Vec<f64>,
}

impl PrincipalAngles {
    /// Angles in radians, smallest first; one per subspace dimension.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Which measure an exact scan ranks by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// Geodesic distance (smaller is closer).
    Geodesic,
    /// Projection kernel (larger is closer).
    ProjectionKernel,
    /// Exponentiated projection kernel with sharpness `beta` (larger
    /// is closer).
    Grbf { beta: f64 },
}

fn check_same_shape(a: &Subspace, b: &Subspace) -> Result<(), GrassmannError> {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "subspaces are {}x{} and {}x{}",
            a.ambient_dim(),
            a.dim(),
            b.ambient_dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Principal angles via the singular values of the cross-Gram
/// `Y_a^T Y_b` (clamped into [0, 1] before the arccosine).
pub fn principal_angles(a: &Subspace, b: &Subspace) -> Result<PrincipalAngles, GrassmannError> {
    check_same_shape(a, b)?;
    let gram = linalg::cross_gram(a.basis(), b.basis())?;
    let sigma = linalg::singular_values(&gram)?;
    let angles: Vec<f64> =
        sigma.values().iter().map(|s| s.clamp(0.0, 1.0).acos()).collect();
    Ok(PrincipalAngles { angles })
}

/// Geodesic distance `sqrt(Σ θ_i²)`.
///
/// Angles below [`ANGLE_ZERO_TOL`] contribute nothing, so the distance
/// from a subspace to itself is exactly 0.
pub fn geodesic_distance(a: &Subspace, b: &Subspace) -> Result<f64, GrassmannError> {
    let pa = principal_angles(a, b)?;
    let sum: f64 = pa
        .angles()
        .iter()
        .filter(|t| **t > ANGLE_ZERO_TOL)
        .map(|t| t * t)
        .sum();
    Ok(sum.sqrt())
}

/// Projection kernel `k_P = Σ cos² θ_i = |Y_a^T Y_b|_F²`,
/// in `[0, m]`. Computed straight from the cross-Gram — no singular
/// values needed.
pub fn projection_kernel(a: &Subspace, b: &Subspace) -> Result<f64, GrassmannError> {
    check_same_shape(a, b)?;
    let gram = linalg::cross_gram(a.basis(), b.basis())?;
    Ok(gram.data().iter().map(|v| v * v).sum())
}

/// Projection metric `sqrt(Σ sin² θ_i) = sqrt(m - k_P)`.
pub fn projection_metric(a: &Subspace, b: &Subspace) -> Result<f64, GrassmannError> {
    let kp = projection_kernel(a, b)?;
    Ok((a.dim() as f64 - kp).max(0.0).sqrt())
}

/// Exponentiated projection kernel `exp(β k_P)`; `beta` must be
/// strictly positive so the ranking matches the plain kernel's.
pub fn grbf_kernel(a: &Subspace, b: &Subspace, beta: f64) -> Result<f64, GrassmannError> {
    if !(beta > 0.0) {
        return Err(GrassmannError::InvalidBeta(beta));
    }
    Ok((beta * projection_kernel(a, b)?).exp())
}

/// Scans the whole database and returns the `top` closest subspaces
/// under `measure` as `(id, score)` pairs — distances ascending,
/// similarities descending, exact ties broken toward the lower id.
pub fn exact_nearest_subspaces(
    db: &SubspaceDB,
    query: &Subspace,
    measure: Measure,
    top: usize,
) -> Result<Vec<(SubspaceId, f64)>, GrassmannError> {
    if db.is_empty() {
        return Err(GrassmannError::EmptyDatabase);
    }
    if db.ambient_dim() != query.ambient_dim() || db.subspace_dim() != query.dim() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "query is {}x{}, database holds {}x{}",
            query.ambient_dim(),
            query.dim(),
            db.ambient_dim(),
            db.subspace_dim()
        )));
    }
    if let Measure::Grbf { beta } = measure {
        if !(beta > 0.0) {
            return Err(GrassmannError::InvalidBeta(beta));
        }
    }

    let mut scored = Vec::with_capacity(db.len());
    for s in db.iter() {
        let score = match measure {
            Measure::Geodesic => geodesic_distance(s, query)?,
            Measure::ProjectionKernel => projection_kernel(s, query)?,
            Measure::Grbf { beta } => grbf_kernel(s, query, beta)?,
        };
        scored.push((s.id(), score));
    }
    let ascending = matches!(measure, Measure::Geodesic);
    scored.sort_by(|a, b| {
        let ord = if ascending { a.1.total_cmp(&b.1) } else { b.1.total_cmp(&a.1) };
        ord.then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(top.min(db.len()));
    Ok(scored)
}
