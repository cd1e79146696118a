//! The approximate nearest-subspace engine.
//!
//! Exact kernel scans pay `N · m²` high-dimensional inner products per
//! query. This engine spends far less by flattening the database into
//! its `N · m` basis columns, indexing those in a vector backend, and
//! reconstructing kernel scores from whatever the backend retrieves:
//!
//! 1. For each query basis column `q_l`, ask the backend for the k
//!    nearest stored columns to `q_l` *and* to `-q_l` (a column can
//!    align with either sign, and Euclidean k-NN only finds the
//!    positive side).
//! 2. Every retrieved column `p` of subspace `i` contributes
//!    `(pᵀ q_l)²` to that subspace's score — the inner product comes
//!    back out of the squared distance for free, and squaring makes
//!    the sign irrelevant. A column retrieved by both signs of the
//!    same `q_l` is counted once.
//! 3. Rank subspaces by accumulated score.
//!
//! With every inner product credited, the score is exactly the
//! projection kernel; truncated retrieval approximates it from below.
//! `k = ceil(N·m / 2)` already guarantees full coverage: of the `N·m`
//! stored columns, each one is within the k nearest of `q_l` or of
//! `-q_l` (or both), because the two rankings are reverses of each
//! other.

use crate::ann::{
    inner_product_from_sqdist, AnnBackend, AnnError, ExactIndex, HashIndex,
    HashIndexParams, VectorRecord,
};
use crate::grassmann::{Subspace, SubspaceDB, SubspaceId};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("backend does not match the database: {0}")]
    RecordMismatch(String),
    #[error("kernel sharpness must be positive, got {0}")]
    InvalidBeta(f64),
    #[error(transparent)]
    Ann(#[from] AnnError),
}

/// Which score the engine reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproxMeasure {
    /// The accumulated squared inner products — an approximation of
    /// the projection kernel from below.
    Apk,
    /// `exp(beta · score)`: the exponentiated variant. A monotone
    /// transform, so the ranking is identical to [`ApproxMeasure::Apk`]
    /// at equal retrieval depth.
    Agrbf { beta: f64 },
}

/// Smallest per-column retrieval depth that makes the approximate
/// score exact: `ceil(n_sub · m / 2)`.
pub fn exactness_budget(n_sub: usize, m: usize) -> usize {
    (n_sub * m + 1) / 2
}

/// Flattens a database into one record per basis column, in id order.
/// `eigen_id` is the 1-based column position within its basis.
pub fn basis_records(db: &SubspaceDB) -> Vec<VectorRecord> {
    let mut records = Vec::with_capacity(db.len() * db.subspace_dim());
    for s in db.iter() {
        for e in 0..s.dim() {
            records.push(VectorRecord {
                subspace_id: s.id(),
                eigen_id: e as u32 + 1,
                vector: s.basis().col(e).to_vec(),
            });
        }
    }
    records
}

/// Reusable per-query scratch: accumulated scores plus the dedup marks
/// that stop a column from being credited twice for one query column.
///
/// Everything is epoch-stamped, so starting a new query costs nothing
/// beyond clearing the list of touched subspaces — no O(N·m) wipes.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    n_sub: usize,
    m: usize,
    scores: Vec<f64>,
    score_mark: Vec<u64>,
    touched: Vec<u32>,
    seen_mark: Vec<u64>,
    query_epoch: u64,
    direction_epoch: u64,
}

impl ScoreTable {
    pub fn new(n_sub: usize, m: usize) -> Self {
        ScoreTable {
            n_sub,
            m,
            scores: vec![0.0; n_sub],
            score_mark: vec![0; n_sub],
            touched: Vec::new(),
            seen_mark: vec![0; n_sub * m],
            query_epoch: 0,
            direction_epoch: 0,
        }
    }

    fn begin_query(&mut self) {
        self.query_epoch += 1;
        self.touched.clear();
    }

    fn begin_direction(&mut self) {
        self.direction_epoch += 1;
    }

    /// Marks `(subspace, eigen)` as credited for the current query
    /// column; returns false if it already was.
    fn first_sighting(&mut self, slot: usize) -> bool {
        if self.seen_mark[slot] == self.direction_epoch {
            false
        } else {
            self.seen_mark[slot] = self.direction_epoch;
            true
        }
    }

    fn credit(&mut self, pos: usize, amount: f64) {
        if self.score_mark[pos] != self.query_epoch {
            self.score_mark[pos] = self.query_epoch;
            self.scores[pos] = 0.0;
            self.touched.push(pos as u32);
        }
        self.scores[pos] += amount;
    }
}

/// A subspace database together with a vector backend over its basis
/// columns.
pub struct AnssIndex<B> {
    db: Arc<SubspaceDB>,
    backend: B,
}

/// Builds the column index with the brute-force backend (searches are
/// then approximate only through the retrieval budget `k`).
pub fn index_database_exact(db: Arc<SubspaceDB>) -> Result<AnssIndex<ExactIndex>, EngineError> {
    let backend = ExactIndex::build(basis_records(&db))?;
    AnssIndex::from_backend(db, backend)
}

/// Builds the column index with the hash backend.
pub fn index_database_hash(
    db: Arc<SubspaceDB>,
    params: HashIndexParams,
) -> Result<AnssIndex<HashIndex>, EngineError> {
    let backend = HashIndex::build(basis_records(&db), params)?;
    AnssIndex::from_backend(db, backend)
}

impl<B: AnnBackend> AnssIndex<B> {
    /// Pairs a database with an already-built backend, verifying that
    /// the backend holds exactly one record per basis column.
    pub fn from_backend(db: Arc<SubspaceDB>, backend: B) -> Result<Self, EngineError> {
        if backend.dim() != db.ambient_dim() {
            return Err(EngineError::DimensionMismatch(format!(
                "backend dimension {} vs database ambient dimension {}",
                backend.dim(),
                db.ambient_dim()
            )));
        }
        let (n, m) = (db.len(), db.subspace_dim());
        if backend.len() != n * m {
            return Err(EngineError::RecordMismatch(format!(
                "backend holds {} records, database needs {}",
                backend.len(),
                n * m
            )));
        }
        let mut present = vec![false; n * m];
        for r in backend.records() {
            let sid = r.subspace_id as usize;
            let eid = r.eigen_id as usize;
            if sid == 0 || sid > n || eid == 0 || eid > m {
                return Err(EngineError::RecordMismatch(format!(
                    "record identity ({}, {}) is outside 1..={} x 1..={}",
                    r.subspace_id, r.eigen_id, n, m
                )));
            }
            let slot = (sid - 1) * m + (eid - 1);
            if present[slot] {
                return Err(EngineError::RecordMismatch(format!(
                    "record identity ({}, {}) appears twice",
                    r.subspace_id, r.eigen_id
                )));
            }
            present[slot] = true;
        }
        Ok(AnssIndex { db, backend })
    }

    pub fn db(&self) -> &Arc<SubspaceDB> {
        &self.db
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    /// Retrieval depth at which [`AnssIndex::search`] becomes exact.
    pub fn exactness_budget(&self) -> usize {
        exactness_budget(self.db.len(), self.db.subspace_dim())
    }

    /// One-shot search; see [`AnssIndex::search_with`].
    pub fn search(
        &self,
        query: &Subspace,
        k: usize,
        measure: ApproxMeasure,
        top: usize,
    ) -> Result<Vec<(SubspaceId, f64)>, EngineError> {
        let mut scratch = ScoreTable::new(self.db.len(), self.db.subspace_dim());
        self.search_with(&mut scratch, query, k, measure, top)
    }

    /// Returns the `top` best-scoring subspaces as `(id, score)`,
    /// retrieving `k` neighbors per query column and sign.
    ///
    /// Scores sort descending with exact ties broken toward the lower
    /// id; subspaces no retrieved column belongs to rank after all
    /// touched ones, in id order, with the score of an empty
    /// accumulator (0 for [`ApproxMeasure::Apk`], 1 for
    /// [`ApproxMeasure::Agrbf`]).
    ///
    /// `k` is clamped into `1..=N·m`. The scratch table is reset (and
    /// resized if it came from a different database shape), never read.
    pub fn search_with(
        &self,
        scratch: &mut ScoreTable,
        query: &Subspace,
        k: usize,
        measure: ApproxMeasure,
        top: usize,
    ) -> Result<Vec<(SubspaceId, f64)>, EngineError> {
        let (n, m) = (self.db.len(), self.db.subspace_dim());
        if query.ambient_dim() != self.db.ambient_dim() || query.dim() != m {
            return Err(EngineError::DimensionMismatch(format!(
                "query is {}x{}, index holds {}x{}",
                query.ambient_dim(),
                query.dim(),
                self.db.ambient_dim(),
                m
            )));
        }
        if let ApproxMeasure::Agrbf { beta } = measure {
            if !(beta > 0.0) {
                return Err(EngineError::InvalidBeta(beta));
            }
        }
        if scratch.n_sub != n || scratch.m != m {
            *scratch = ScoreTable::new(n, m);
        }
        let k = k.clamp(1, n * m);

        scratch.begin_query();
        let mut negated = vec![0.0; query.ambient_dim()];
        for l in 0..m {
            scratch.begin_direction();
            let column = query.basis().col(l);
            self.credit_hits(scratch, &self.backend.knn(column, k)?)?;
            for (dst, src) in negated.iter_mut().zip(column) {
                *dst = -src;
            }
            self.credit_hits(scratch, &self.backend.knn(&negated, k)?)?;
        }

        let mut ranked: Vec<(SubspaceId, f64)> = scratch
            .touched
            .iter()
            .map(|&pos| (pos + 1, scratch.scores[pos as usize]))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let top = top.min(n);
        if ranked.len() < top {
            // Pad with the never-touched subspaces, in id order.
            for pos in 0..n {
                if scratch.score_mark[pos] != scratch.query_epoch {
                    ranked.push((pos as SubspaceId + 1, 0.0));
                    if ranked.len() == top {
                        break;
                    }
                }
            }
        }
        ranked.truncate(top);

        if let ApproxMeasure::Agrbf { beta } = measure {
            for entry in &mut ranked {
                entry.1 = (beta * entry.1).exp();
            }
        }
        Ok(ranked)
    }

    fn credit_hits(
        &self,
        scratch: &mut ScoreTable,
        hits: &[crate::ann::NeighborHit],
    ) -> Result<(), EngineError> {
        let m = scratch.m;
        for hit in hits {
            let slot = (hit.subspace_id as usize - 1) * m + (hit.eigen_id as usize - 1);
            if scratch.first_sighting(slot) {
                let ip = inner_product_from_sqdist(hit.sq_dist)?;
                scratch.credit(hit.subspace_id as usize - 1, ip * ip);
            }
        }
        Ok(())
    }
}
