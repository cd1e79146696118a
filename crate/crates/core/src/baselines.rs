//! Reference methods the approximate engine is compared against.
//!
//! **Projector lift.** A subspace's projection matrix `A = Y Yᵀ`
//! depends only on the span, and `|A₁ - A₂|_F² = 2m - 2·k_P`, so
//! embedding each subspace as the (symmetry-deduplicated) vector of
//! `A`'s entries turns kernel ranking into plain Euclidean ranking in
//! dimension `D(D+1)/2`. Exact, but the lift dimension explodes
//! quadratically with the ambient dimension.
//!
//! **Subspace hash.** Draw `K` random unit vectors per table; a
//! subspace's bit is 1 if the vector lies within π/6 of the span.
//! Candidate subspaces share the query's bit pattern in at least one
//! table and are then ranked by exact geodesic distance. In high
//! ambient dimensions a random vector is never within π/6 of a
//! low-dimensional span, all signatures collapse to zero, and every
//! query degenerates into a full scan — which is precisely the failure
//! mode worth measuring.

use crate::grassmann::{self, GrassmannError, Subspace, SubspaceDB, SubspaceId};
use crate::linalg::dot;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

// ───────────────────────── projector lift ─────────────────────────

/// A subspace's projection matrix flattened to `D(D+1)/2` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub subspace_id: SubspaceId,
    pub coords: Vec<f64>,
}

/// Number of lift coordinates for ambient dimension `d`.
pub fn lift_dim(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Flattens `Y Yᵀ` into the diagonal entries followed by the strict
/// upper triangle (row by row) scaled by √2 — the scaling makes the
/// flat Euclidean distance equal the full-matrix Frobenius distance.
pub fn bhz_lift(s: &Subspace) -> LiftedPoint {
    let d = s.ambient_dim();
    let basis = s.basis();
    let mut coords = Vec::with_capacity(lift_dim(d));
    for i in 0..d {
        let mut a_ii = 0.0;
        for e in 0..s.dim() {
            let y = basis.get(i, e);
            a_ii += y * y;
        }
        coords.push(a_ii);
    }
    let sqrt2 = 2.0f64.sqrt();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut a_ij = 0.0;
            for e in 0..s.dim() {
                a_ij += basis.get(i, e) * basis.get(j, e);
            }
            coords.push(sqrt2 * a_ij);
        }
    }
    LiftedPoint { subspace_id: s.id(), coords }
}

/// Lifts a whole database, preserving id order.
pub fn bhz_lift_all(db: &SubspaceDB) -> Vec<LiftedPoint> {
    db.iter().map(bhz_lift).collect()
}

/// Exact scan in lift space: Euclidean distances ascending, exact ties
/// toward the lower id, truncated to `top` entries.
pub fn bhz_search(
    lifted: &[LiftedPoint],
    query: &Subspace,
    top: usize,
) -> Result<Vec<(SubspaceId, f64)>, BaselineError> {
    let first = lifted
        .first()
        .ok_or_else(|| BaselineError::BadParams("empty lifted database".into()))?;
    let expected = lift_dim(query.ambient_dim());
    if first.coords.len() != expected {
        return Err(BaselineError::DimensionMismatch(format!(
            "lift has {} coordinates, query's ambient dimension needs {}",
            first.coords.len(),
            expected
        )));
    }
    let q = bhz_lift(query);
    let mut scored: Vec<(SubspaceId, f64)> = lifted
        .iter()
        .map(|p| {
            let sq: f64 = p
                .coords
                .iter()
                .zip(&q.coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (p.subspace_id, sq.sqrt())
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored.truncate(top.min(scored.len()));
    Ok(scored)
}

// ───────────────────────── subspace hash ─────────────────────────

/// Squared alignment `|Yᵀr|²` of a unit vector with a span; the
/// angle between them is `arccos` of its square root.
fn span_alignment_sq(s: &Subspace, r: &[f64]) -> f64 {
    let mut sum = 0.0;
    for e in 0..s.dim() {
        let ip = dot(s.basis().col(e), r);
        sum += ip * ip;
    }
    sum
}

/// `cos²(π/6)`: a vector within π/6 of a span has at least this much
/// squared alignment.
const ALIGNMENT_THRESHOLD: f64 = 0.75;

/// Hyperplane-arrangement hash over whole subspaces.
pub struct GlhIndex {
    db: Arc<SubspaceDB>,
    tables: usize,
    vectors_per_table: usize,
    seed: u64,
    /// `tables * vectors_per_table` unit vectors, each `D` long.
    vectors: Vec<f64>,
    /// Signature of every subspace in every table (table-major).
    signatures: Vec<u64>,
    buckets: Vec<HashMap<u64, Vec<SubspaceId>>>,
}

/// One query's outcome: the ranking, whether the buckets came up empty
/// (forcing a scan of everything), and how many distinct subspaces
/// were actually ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct GlhAnswer {
    pub ranking: Vec<(SubspaceId, f64)>,
    pub fallback: bool,
    pub candidates: usize,
}

/// Builds the hash: `tables` independent tables of `vectors_per_table`
/// random unit vectors each, drawn from `seed`.
pub fn glh_build(
    db: Arc<SubspaceDB>,
    tables: usize,
    vectors_per_table: usize,
    seed: u64,
) -> Result<GlhIndex, BaselineError> {
    if tables == 0 {
        return Err(BaselineError::BadParams("need at least one table".into()));
    }
    if vectors_per_table == 0 || vectors_per_table > 63 {
        return Err(BaselineError::BadParams(format!(
            "vectors per table must be 1..=63, got {vectors_per_table}"
        )));
    }
    let d = db.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(tables * vectors_per_table * d);
    for _ in 0..tables * vectors_per_table {
        let start = vectors.len();
        for _ in 0..d {
            vectors.push(rng.sample::<f64, _>(StandardNormal));
        }
        let v = &mut vectors[start..];
        let len = dot(v, v).sqrt();
        if len > 1e-12 {
            for x in v.iter_mut() {
                *x /= len;
            }
        } else {
            v[0] = 1.0;
        }
    }

    let mut index = GlhIndex {
        db,
        tables,
        vectors_per_table,
        seed,
        vectors,
        signatures: Vec::new(),
        buckets: Vec::new(),
    };
    let mut signatures = Vec::with_capacity(index.db.len() * tables);
    for s in index.db.iter() {
        for t in 0..tables {
            signatures.push(index.signature(t, s));
        }
    }
    index.signatures = signatures;
    let mut buckets: Vec<HashMap<u64, Vec<SubspaceId>>> =
        (0..tables).map(|_| HashMap::new()).collect();
    for (si, s) in index.db.iter().enumerate() {
        for (t, bucket) in buckets.iter_mut().enumerate() {
            let sig = index.signatures[si * tables + t];
            bucket.entry(sig).or_default().push(s.id());
        }
    }
    index.buckets = buckets;
    Ok(index)
}

impl GlhIndex {
    pub fn db(&self) -> &Arc<SubspaceDB> {
        &self.db
    }

    pub fn tables(&self) -> usize {
        self.tables
    }

    pub fn vectors_per_table(&self) -> usize {
        self.vectors_per_table
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// All random unit vectors, table-major.
    pub fn random_vectors(&self) -> &[f64] {
        &self.vectors
    }

    fn vector(&self, table: usize, pos: usize) -> &[f64] {
        let d = self.db.ambient_dim();
        let start = (table * self.vectors_per_table + pos) * d;
        &self.vectors[start..start + d]
    }

    fn signature(&self, table: usize, s: &Subspace) -> u64 {
        let mut sig = 0u64;
        for pos in 0..self.vectors_per_table {
            if span_alignment_sq(s, self.vector(table, pos)) >= ALIGNMENT_THRESHOLD {
                sig |= 1 << pos;
            }
        }
        sig
    }

    /// Fraction of 1 bits over all stored signatures — the health
    /// indicator of this hash. Near zero means the bits carry no
    /// information and queries degenerate to full scans.
    pub fn one_bit_fraction(&self) -> f64 {
        let ones: u64 = self.signatures.iter().map(|s| s.count_ones() as u64).sum();
        let total = self.signatures.len() as u64 * self.vectors_per_table as u64;
        ones as f64 / total as f64
    }
}

/// Collects every subspace sharing the query's signature in at least
/// one table, then ranks the candidates by exact geodesic distance
/// (all of the database if the buckets yield nothing).
pub fn glh_query(
    index: &GlhIndex,
    query: &Subspace,
    top: usize,
) -> Result<GlhAnswer, BaselineError> {
    let db = &index.db;
    if query.ambient_dim() != db.ambient_dim() || query.dim() != db.subspace_dim() {
        return Err(BaselineError::DimensionMismatch(format!(
            "query is {}x{}, index holds {}x{}",
            query.ambient_dim(),
            query.dim(),
            db.ambient_dim(),
            db.subspace_dim()
        )));
    }
    let mut member = vec![false; db.len() + 1];
    let mut candidates: Vec<SubspaceId> = Vec::new();
    for (t, buckets) in index.buckets.iter().enumerate() {
        let sig = index.signature(t, query);
        if let Some(ids) = buckets.get(&sig) {
            for &id in ids {
                if !member[id as usize] {
                    member[id as usize] = true;
                    candidates.push(id);
                }
            }
        }
    }
    let fallback = candidates.is_empty();
    if fallback {
        candidates = db.iter().map(|s| s.id()).collect();
    }

    let mut ranking = Vec::with_capacity(candidates.len());
    for id in &candidates {
        let s = db.get(*id).expect("bucket ids point into the database");
        ranking.push((*id, grassmann::geodesic_distance(s, query)?));
    }
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let count = ranking.len();
    ranking.truncate(top.min(count));
    Ok(GlhAnswer { ranking, fallback, candidates: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{exact_nearest_subspaces, Measure};
    use crate::linalg::{orthonormalize, Matrix};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn assert_near(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn random_subspace(rng: &mut ChaCha8Rng, id: SubspaceId, d: usize, m: usize) -> Subspace {
        let data: Vec<f64> = (0..d * m).map(|_| rng.sample(StandardNormal)).collect();
        let basis = orthonormalize(&Matrix::from_col_major(d, m, data)).unwrap();
        Subspace::new(id, basis).unwrap()
    }

    fn random_db(seed: u64, n: usize, d: usize, m: usize) -> Arc<SubspaceDB> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let subspaces: Vec<Subspace> =
            (1..=n as u32).map(|id| random_subspace(&mut rng, id, d, m)).collect();
        Arc::new(SubspaceDB::new(subspaces).unwrap())
    }

    fn axis_line(id: SubspaceId, d: usize, axis: usize) -> Subspace {
        let mut basis = Matrix::zeros(d, 1);
        basis.set(axis, 0, 1.0);
        Subspace::new(id, basis).unwrap()
    }

    #[test]
    fn lift_of_an_axis_line_is_explicit() {
        // span(e1) in R²: projector [[1,0],[0,0]] → diagonal (1, 0),
        // upper triangle (0). Exactly representable, so compare exactly.
        let s = axis_line(1, 2, 0);
        let lifted = bhz_lift(&s);
        assert_eq!(lifted.coords, vec![1.0, 0.0, 0.0]);
        assert_eq!(lift_dim(2), 3);
        assert_eq!(lift_dim(64), 2080);
    }

    #[test]
    fn orthogonal_lines_sit_sqrt_two_apart() {
        let a = bhz_lift(&axis_line(1, 2, 0));
        let b = bhz_lift(&axis_line(2, 2, 1));
        let sq: f64 =
            a.coords.iter().zip(&b.coords).map(|(x, y)| (x - y) * (x - y)).sum();
        assert_near(sq, 2.0, 1e-15);
    }

    #[test]
    fn lift_distance_encodes_the_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        for _ in 0..50 {
            let a = random_subspace(&mut rng, 1, 16, 3);
            let b = random_subspace(&mut rng, 2, 16, 3);
            let la = bhz_lift(&a);
            let lb = bhz_lift(&b);
            let sq: f64 =
                la.coords.iter().zip(&lb.coords).map(|(x, y)| (x - y) * (x - y)).sum();
            let kp = grassmann::projection_kernel(&a, &b).unwrap();
            assert_near(sq, 2.0 * 3.0 - 2.0 * kp, 1e-9);
        }
    }

    #[test]
    fn lift_distance_matches_full_projector_frobenius_oracle() {
        // Independent of the lift layout: build both D x D projectors
        // entry by entry and take the literal Frobenius distance.
        let mut rng = ChaCha8Rng::seed_from_u64(112);
        let a = random_subspace(&mut rng, 1, 10, 3);
        let b = random_subspace(&mut rng, 2, 10, 3);
        let la = bhz_lift(&a);
        let lb = bhz_lift(&b);
        let lift_dist: f64 = la
            .coords
            .iter()
            .zip(&lb.coords)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();

        let projector = |s: &Subspace| {
            let mut p = Matrix::zeros(10, 10);
            for i in 0..10 {
                for j in 0..10 {
                    let mut v = 0.0;
                    for e in 0..3 {
                        v += s.basis().get(i, e) * s.basis().get(j, e);
                    }
                    p.set(i, j, v);
                }
            }
            p
        };
        let diff = {
            let pa = projector(&a);
            let pb = projector(&b);
            let mut sq = 0.0;
            for i in 0..10 {
                for j in 0..10 {
                    let d = pa.get(i, j) - pb.get(i, j);
                    sq += d * d;
                }
            }
            sq.sqrt()
        };
        assert_near(lift_dist, diff, 1e-10);
    }

    #[test]
    fn lift_ignores_basis_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        let s = random_subspace(&mut rng, 1, 12, 4);
        let r = orthonormalize(&Matrix::from_col_major(
            4,
            4,
            (0..16).map(|_| rng.sample(StandardNormal)).collect(),
        ))
        .unwrap();
        let rotated = Subspace::new(1, s.basis().multiply(&r)).unwrap();
        let a = bhz_lift(&s);
        let b = bhz_lift(&rotated);
        let worst = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-10, "projector changed under rotation by {worst}");
    }

    #[test]
    fn lift_search_reproduces_the_kernel_permutation() {
        let db = random_db(114, 50, 12, 3);
        let lifted = bhz_lift_all(&db);
        assert_eq!(lifted.len(), 50);
        let mut rng = ChaCha8Rng::seed_from_u64(115);
        let q = random_subspace(&mut rng, 1, 12, 3);

        let via_lift = bhz_search(&lifted, &q, 50).unwrap();
        let via_kernel =
            exact_nearest_subspaces(&db, &q, Measure::ProjectionKernel, 50).unwrap();
        let lift_ids: Vec<_> = via_lift.iter().map(|h| h.0).collect();
        let kernel_ids: Vec<_> = via_kernel.iter().map(|h| h.0).collect();
        assert_eq!(lift_ids, kernel_ids);

        // Reported distances are √(2m - 2k_P).
        for (l, k) in via_lift.iter().zip(&via_kernel) {
            assert_near(l.1, (2.0 * 3.0 - 2.0 * k.1).max(0.0).sqrt(), 1e-9);
        }
    }

    #[test]
    fn lift_search_validates_input() {
        assert!(bhz_search(&[], &axis_line(1, 4, 0), 1).is_err());
        let db = random_db(116, 3, 6, 2);
        let lifted = bhz_lift_all(&db);
        let wrong = axis_line(1, 7, 0);
        assert!(matches!(
            bhz_search(&lifted, &wrong, 1),
            Err(BaselineError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn alignment_predicate_matches_geometry() {
        let s = axis_line(1, 2, 0);
        // Parallel: angle 0 → aligned. Perpendicular: angle π/2 → not.
        assert!(span_alignment_sq(&s, &[1.0, 0.0]) >= ALIGNMENT_THRESHOLD);
        assert!(span_alignment_sq(&s, &[0.0, 1.0]) < ALIGNMENT_THRESHOLD);
        // 45° is outside the π/6 cone.
        let inv = 1.0 / 2.0f64.sqrt();
        assert!(span_alignment_sq(&s, &[inv, inv]) < ALIGNMENT_THRESHOLD);
        // 20° is inside.
        let t = 20.0f64.to_radians();
        assert!(span_alignment_sq(&s, &[t.cos(), t.sin()]) >= ALIGNMENT_THRESHOLD);
    }

    #[test]
    fn every_subspace_lands_in_one_bucket_per_table() {
        let db = random_db(117, 20, 8, 2);
        let index = glh_build(Arc::clone(&db), 5, 3, 7).unwrap();
        for table in &index.buckets {
            let total: usize = table.values().map(|v| v.len()).sum();
            assert_eq!(total, 20);
        }
        let f = index.one_bit_fraction();
        assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn member_query_finds_itself_first() {
        let db = random_db(118, 15, 6, 2);
        let index = glh_build(Arc::clone(&db), 4, 2, 21).unwrap();
        let target = db.get(9).unwrap();
        let q = Subspace::new(1, target.basis().clone()).unwrap();
        let answer = glh_query(&index, &q, 1).unwrap();
        assert_eq!(answer.ranking[0], (9, 0.0));
        assert!(!answer.fallback, "an identical subspace shares its own buckets");
    }

    #[test]
    fn high_ambient_dimension_degenerates_to_full_scans() {
        // In D = 128 a random unit vector essentially never lies
        // within π/6 of a 2-dimensional span: all signatures are zero,
        // every query collides with everything, and the answer equals
        // the exact geodesic ranking.
        let db = random_db(119, 12, 128, 2);
        let index = glh_build(Arc::clone(&db), 4, 3, 5).unwrap();
        assert_eq!(index.one_bit_fraction(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(120);
        let q = random_subspace(&mut rng, 1, 128, 2);
        let answer = glh_query(&index, &q, 12).unwrap();
        assert!(!answer.fallback, "the all-zero bucket is shared, not empty");
        assert_eq!(answer.candidates, 12, "everything became a candidate");
        let exact = exact_nearest_subspaces(&db, &q, Measure::Geodesic, 12).unwrap();
        assert_eq!(answer.ranking, exact);
    }

    #[test]
    fn empty_buckets_fall_back_to_scanning_everything() {
        // Low dimension, so bits vary: hunt a (seed, query) pair whose
        // signature is unused, then freeze it. Seed 3 with this query
        // produces empty buckets for S = 1, K = 4 over this database.
        let db = random_db(121, 6, 3, 1);
        let index = glh_build(Arc::clone(&db), 1, 4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(122);
        let mut fallback_seen = false;
        for _ in 0..40 {
            let q = random_subspace(&mut rng, 1, 3, 1);
            let answer = glh_query(&index, &q, 6).unwrap();
            assert_eq!(answer.ranking.len(), 6.min(answer.candidates));
            if answer.fallback {
                assert_eq!(answer.candidates, 6, "fallback must rank everything");
                let exact =
                    exact_nearest_subspaces(&db, &q, Measure::Geodesic, 6).unwrap();
                assert_eq!(answer.ranking, exact);
                fallback_seen = true;
                break;
            }
        }
        assert!(fallback_seen, "no fallback in 40 random queries — recalibrate the seed");
    }

    #[test]
    fn build_validates_parameters() {
        let db = random_db(123, 3, 4, 1);
        assert!(glh_build(Arc::clone(&db), 0, 3, 1).is_err());
        assert!(glh_build(Arc::clone(&db), 2, 0, 1).is_err());
        assert!(glh_build(Arc::clone(&db), 2, 64, 1).is_err());
        let index = glh_build(Arc::clone(&db), 2, 3, 1).unwrap();
        let wrong = random_subspace(&mut ChaCha8Rng::seed_from_u64(1), 1, 5, 1);
        assert!(matches!(
            glh_query(&index, &wrong, 1),
            Err(BaselineError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn queries_are_deterministic() {
        let db = random_db(124, 10, 5, 2);
        let a = glh_build(Arc::clone(&db), 3, 4, 9).unwrap();
        let b = glh_build(Arc::clone(&db), 3, 4, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(125);
        let q = random_subspace(&mut rng, 1, 5, 2);
        assert_eq!(glh_query(&a, &q, 10).unwrap(), glh_query(&b, &q, 10).unwrap());
        assert_eq!(a.random_vectors(), b.random_vectors());
    }
}
