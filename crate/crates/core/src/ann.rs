//! Euclidean nearest-neighbor backends over unit vectors.
//!
//! The approximate subspace engine flattens every basis into its
//! columns and asks a vector index for nearest neighbors. Two backends
//! implement that contract: [`ExactIndex`] (brute force, the reference
//! everything else is judged against) and [`HashIndex`] (random sign
//! hyperplanes with Hamming-ball multi-probing).
//!
//! For unit vectors the squared Euclidean distance and the inner
//! product carry the same information, `|a - b|² = 2 - 2 aᵀb`, so both
//! backends compute distances as `2 - 2·dot` and callers can recover
//! the inner product losslessly via [`inner_product_from_sqdist`].

use crate::grassmann::SubspaceId;
use crate::linalg::dot;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use thiserror::Error;

/// How far a stored vector's norm may stray from 1.
pub const UNIT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnError {
    #[error("cannot build an index over zero records")]
    EmptyInput,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("record ({subspace_id}, {eigen_id}) has norm {norm} (unit within {UNIT_NORM_TOL:.0e} required)")]
    NonUnitVector { subspace_id: SubspaceId, eigen_id: u32, norm: f64 },
    #[error("duplicate record identity ({subspace_id}, {eigen_id})")]
    DuplicateRecord { subspace_id: SubspaceId, eigen_id: u32 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("squared distance {0} is outside [0, 4]")]
    OutOfRange(f64),
    #[error("corrupt serialized index: {0}")]
    Corrupt(String),
}

/// One indexed basis column: which subspace it came from, which
/// position inside that basis (1-based), and the unit vector itself.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRecord {
    pub subspace_id: SubspaceId,
    pub eigen_id: u32,
    pub vector: Vec<f64>,
}

/// A k-NN result: the record's identity plus its squared Euclidean
/// distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborHit {
    pub subspace_id: SubspaceId,
    pub eigen_id: u32,
    pub sq_dist: f64,
}

/// Recovers the inner product `aᵀb` of two unit vectors from their
/// squared Euclidean distance, clamped into [-1, 1].
pub fn inner_product_from_sqdist(sq_dist: f64) -> Result<f64, AnnError> {
    if !(0.0..=4.0 + 1e-9).contains(&sq_dist) {
        return Err(AnnError::OutOfRange(sq_dist));
    }
    Ok((1.0 - 0.5 * sq_dist).clamp(-1.0, 1.0))
}

/// Common contract of the vector backends.
///
/// `knn` returns the `k` records nearest to `query` (fewer only if the
/// index is smaller than `k`), sorted by squared distance ascending
/// with exact ties broken toward the smaller `(subspace_id, eigen_id)`.
pub trait AnnBackend: Send + Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn dim(&self) -> usize;
    fn records(&self) -> &[VectorRecord];
    fn knn(&self, query: &[f64], k: usize) -> Result<Vec<NeighborHit>, AnnError>;
}

impl<T: AnnBackend + ?Sized> AnnBackend for Box<T> {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn records(&self) -> &[VectorRecord] {
        (**self).records()
    }
    fn knn(&self, query: &[f64], k: usize) -> Result<Vec<NeighborHit>, AnnError> {
        (**self).knn(query, k)
    }
}

fn validate_records(records: &[VectorRecord]) -> Result<usize, AnnError> {
    let first = records.first().ok_or(AnnError::EmptyInput)?;
    let dim = first.vector.len();
    let mut seen = std::collections::HashSet::with_capacity(records.len());
    for r in records {
        if r.vector.len() != dim {
            return Err(AnnError::DimensionMismatch(format!(
                "record ({}, {}) has dimension {}, expected {}",
                r.subspace_id,
                r.eigen_id,
                r.vector.len(),
                dim
            )));
        }
        let norm = dot(&r.vector, &r.vector).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(AnnError::NonUnitVector {
                subspace_id: r.subspace_id,
                eigen_id: r.eigen_id,
                norm,
            });
        }
        if !seen.insert((r.subspace_id, r.eigen_id)) {
            return Err(AnnError::DuplicateRecord {
                subspace_id: r.subspace_id,
                eigen_id: r.eigen_id,
            });
        }
    }
    Ok(dim)
}

#[inline]
fn sq_dist_unit(query: &[f64], v: &[f64]) -> f64 {
    (2.0 - 2.0 * dot(query, v)).clamp(0.0, 4.0)
}

/// Heap entry ordered so the max-heap keeps the k best: greater
/// distance is "worse", and on exact distance ties the larger identity
/// is worse (so smaller identities survive).
#[derive(PartialEq)]
struct HeapEntry {
    sq_dist: f64,
    subspace_id: SubspaceId,
    eigen_id: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sq_dist
            .total_cmp(&other.sq_dist)
            .then(self.subspace_id.cmp(&other.subspace_id))
            .then(self.eigen_id.cmp(&other.eigen_id))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn select_k(
    candidates: impl Iterator<Item = (SubspaceId, u32, f64)>,
    k: usize,
) -> Vec<NeighborHit> {
    let mut heap = std::collections::BinaryHeap::with_capacity(k + 1);
    for (subspace_id, eigen_id, sq_dist) in candidates {
        let entry = HeapEntry { sq_dist, subspace_id, eigen_id };
        if heap.len() < k {
            heap.push(entry);
        } else if let Some(worst) = heap.peek() {
            if entry < *worst {
                heap.pop();
                heap.push(entry);
            }
        }
    }
    heap.into_sorted_vec()
        .into_iter()
        .map(|e| NeighborHit {
            subspace_id: e.subspace_id,
            eigen_id: e.eigen_id,
            sq_dist: e.sq_dist,
        })
        .collect()
}

// ───────────────────────── exact backend ─────────────────────────

/// Brute-force backend: every query scans all records. Always right,
/// and fast enough for the scales where "always right" is affordable.
#[derive(Debug, Clone)]
pub struct ExactIndex {
    records: Vec<VectorRecord>,
    dim: usize,
}

impl ExactIndex {
    pub fn build(records: Vec<VectorRecord>) -> Result<Self, AnnError> {
        let dim = validate_records(&records)?;
        Ok(ExactIndex { records, dim })
    }
}

impl AnnBackend for ExactIndex {
    fn len(&self) -> usize {
        self.records.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn records(&self) -> &[VectorRecord] {
        &self.records
    }

    fn knn(&self, query: &[f64], k: usize) -> Result<Vec<NeighborHit>, AnnError> {
        if query.len() != self.dim {
            return Err(AnnError::DimensionMismatch(format!(
                "query has dimension {}, index holds {}",
                query.len(),
                self.dim
            )));
        }
        let k = k.min(self.records.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        Ok(select_k(
            self.records
                .iter()
                .map(|r| (r.subspace_id, r.eigen_id, sq_dist_unit(query, &r.vector))),
            k,
        ))
    }
}

// ───────────────────────── hash backend ─────────────────────────

/// Shape of the sign-hyperplane hash.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashIndexParams {
    /// Number of independent hash tables.
    pub tables: usize,
    /// Sign bits per table (1..=63).
    pub bits_per_table: usize,
    /// Hamming radius searched around the query's signature in every
    /// table (0 = exact bucket only).
    pub probe_radius: usize,
    /// Seed for drawing the hyperplane normals.
    pub seed: u64,
}

impl Default for HashIndexParams {
    /// Tuned for the large regime this crate targets (thousands of
    /// stored subspaces in an ambient dimension around a thousand):
    /// enough bits that buckets stay near-singleton, enough tables and
    /// probing that close vectors still collide somewhere.
    fn default() -> Self {
        HashIndexParams { tables: 6, bits_per_table: 14, probe_radius: 2, seed: 0 }
    }
}

impl HashIndexParams {
    pub fn with_seed(seed: u64) -> Self {
        HashIndexParams { seed, ..Default::default() }
    }

    fn validate(&self) -> Result<(), AnnError> {
        if self.tables == 0 {
            return Err(AnnError::BadParams("need at least one table".into()));
        }
        if self.bits_per_table == 0 || self.bits_per_table > 63 {
            return Err(AnnError::BadParams(format!(
                "bits per table must be 1..=63, got {}",
                self.bits_per_table
            )));
        }
        Ok(())
    }

    /// Fixed-size little-endian encoding (tables, bits, radius, seed).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20);
        out.extend_from_slice(&(self.tables as u32).to_le_bytes());
        out.extend_from_slice(&(self.bits_per_table as u32).to_le_bytes());
        out.extend_from_slice(&(self.probe_radius as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AnnError> {
        if bytes.len() != 20 {
            return Err(AnnError::Corrupt(format!(
                "hash parameter block must be 20 bytes, got {}",
                bytes.len()
            )));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let params = HashIndexParams {
            tables: u32_at(0) as usize,
            bits_per_table: u32_at(4) as usize,
            probe_radius: u32_at(8) as usize,
            seed: u64::from_le_bytes(bytes[12..20].try_into().unwrap()),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Locality-sensitive backend: each table assigns a signature of sign
/// bits (one per random unit hyperplane normal), and a query inspects
/// every bucket within `probe_radius` bit flips of its own signature.
#[derive(Debug, Clone)]
pub struct HashIndex {
    records: Vec<VectorRecord>,
    dim: usize,
    params: HashIndexParams,
    /// `tables * bits_per_table` unit normals, each `dim` long,
    /// laid out table-major.
    hyperplanes: Vec<f64>,
    buckets: Vec<HashMap<u64, Vec<u32>>>,
}

impl HashIndex {
    pub fn build(records: Vec<VectorRecord>, params: HashIndexParams) -> Result<Self, AnnError> {
        params.validate()?;
        let dim = validate_records(&records)?;
        let hyperplanes = draw_hyperplanes(&params, dim);
        let mut index =
            HashIndex { records, dim, params, hyperplanes, buckets: Vec::new() };
        index.buckets = index.fill_buckets();
        Ok(index)
    }

    /// Reassembles an index from persisted parts. `bucket_bytes`, when
    /// given, is parsed instead of re-hashing every record (see
    /// [`HashIndex::buckets_to_bytes`] for the layout).
    pub fn from_parts(
        records: Vec<VectorRecord>,
        params: HashIndexParams,
        hyperplanes: Vec<f64>,
        bucket_bytes: Option<&[u8]>,
    ) -> Result<Self, AnnError> {
        params.validate()?;
        let dim = validate_records(&records)?;
        if hyperplanes.len() != params.tables * params.bits_per_table * dim {
            return Err(AnnError::Corrupt(format!(
                "expected {} hyperplane coefficients, got {}",
                params.tables * params.bits_per_table * dim,
                hyperplanes.len()
            )));
        }
        let mut index =
            HashIndex { records, dim, params, hyperplanes, buckets: Vec::new() };
        index.buckets = match bucket_bytes {
            Some(bytes) => parse_buckets(bytes, &params, index.records.len())?,
            None => index.fill_buckets(),
        };
        Ok(index)
    }

    pub fn params(&self) -> &HashIndexParams {
        &self.params
    }

    /// All hyperplane coefficients, table-major.
    pub fn hyperplanes(&self) -> &[f64] {
        &self.hyperplanes
    }

    fn normal(&self, table: usize, bit: usize) -> &[f64] {
        let start = (table * self.params.bits_per_table + bit) * self.dim;
        &self.hyperplanes[start..start + self.dim]
    }

    fn signature(&self, table: usize, v: &[f64]) -> u64 {
        let mut sig = 0u64;
        for bit in 0..self.params.bits_per_table {
            if dot(self.normal(table, bit), v) > 0.0 {
                sig |= 1 << bit;
            }
        }
        sig
    }

    fn fill_buckets(&self) -> Vec<HashMap<u64, Vec<u32>>> {
        let mut buckets: Vec<HashMap<u64, Vec<u32>>> =
            (0..self.params.tables).map(|_| HashMap::new()).collect();
        for (idx, r) in self.records.iter().enumerate() {
            for (t, table) in buckets.iter_mut().enumerate() {
                let sig = self.signature(t, &r.vector);
                table.entry(sig).or_default().push(idx as u32);
            }
        }
        buckets
    }

    /// Deterministic bucket serialization: per table a bucket count,
    /// then buckets sorted by signature, each as
    /// `(u64 signature, u32 len, len * u32 record positions)`.
    /// Record positions keep their build order, so write → read →
    /// write reproduces identical bytes.
    pub fn buckets_to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for table in &self.buckets {
            let mut sigs: Vec<&u64> = table.keys().collect();
            sigs.sort();
            out.extend_from_slice(&(table.len() as u32).to_le_bytes());
            for sig in sigs {
                let members = &table[sig];
                out.extend_from_slice(&sig.to_le_bytes());
                out.extend_from_slice(&(members.len() as u32).to_le_bytes());
                for m in members {
                    out.extend_from_slice(&m.to_le_bytes());
                }
            }
        }
        out
    }
}

fn draw_hyperplanes(params: &HashIndexParams, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let count = params.tables * params.bits_per_table;
    let mut planes = Vec::with_capacity(count * dim);
    for _ in 0..count {
        let start = planes.len();
        for _ in 0..dim {
            planes.push(rng.sample::<f64, _>(StandardNormal));
        }
        let normal = &mut planes[start..];
        let len = dot(normal, normal).sqrt();
        if len > 1e-12 {
            for v in normal.iter_mut() {
                *v /= len;
            }
        } else {
            // Essentially impossible, but keep the normal usable.
            normal[0] = 1.0;
        }
    }
    planes
}

fn parse_buckets(
    bytes: &[u8],
    params: &HashIndexParams,
    n_records: usize,
) -> Result<Vec<HashMap<u64, Vec<u32>>>, AnnError> {
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8], AnnError> {
        if pos + n > bytes.len() {
            return Err(AnnError::Corrupt("bucket section truncated".into()));
        }
        let s = &bytes[pos..pos + n];
        pos += n;
        Ok(s)
    };
    let mut buckets = Vec::with_capacity(params.tables);
    for t in 0..params.tables {
        let n_buckets = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut table = HashMap::with_capacity(n_buckets);
        let mut total = 0usize;
        for _ in 0..n_buckets {
            let sig = u64::from_le_bytes(take(8)?.try_into().unwrap());
            if params.bits_per_table < 64 && sig >> params.bits_per_table != 0 {
                return Err(AnnError::Corrupt(format!(
                    "signature {sig:#x} uses more than {} bits",
                    params.bits_per_table
                )));
            }
            let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let mut members = Vec::with_capacity(len);
            for _ in 0..len {
                let idx = u32::from_le_bytes(take(4)?.try_into().unwrap());
                if idx as usize >= n_records {
                    return Err(AnnError::Corrupt(format!(
                        "bucket member {idx} out of range ({n_records} records)"
                    )));
                }
                members.push(idx);
            }
            total += len;
            if table.insert(sig, members).is_some() {
                return Err(AnnError::Corrupt(format!("duplicate signature in table {t}")));
            }
        }
        if total != n_records {
            return Err(AnnError::Corrupt(format!(
                "table {t} holds {total} members, expected {n_records}"
            )));
        }
        buckets.push(table);
    }
    if pos != bytes.len() {
        return Err(AnnError::Corrupt("trailing bytes after bucket section".into()));
    }
    Ok(buckets)
}

/// Calls `f` for every bit mask of weight `0..=radius` over `bits`
/// positions, lowest weight first, positions in ascending order within
/// a weight class.
fn for_each_probe_mask(bits: usize, radius: usize, f: &mut impl FnMut(u64)) {
    f(0);
    for r in 1..=radius.min(bits) {
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            let mut mask = 0u64;
            for &b in &idx {
                mask |= 1 << b;
            }
            f(mask);
            let mut advanced = false;
            let mut i = r;
            while i > 0 {
                i -= 1;
                if idx[i] < bits - (r - i) {
                    idx[i] += 1;
                    for j in i + 1..r {
                        idx[j] = idx[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
}

impl AnnBackend for HashIndex {
    fn len(&self) -> usize {
        self.records.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn records(&self) -> &[VectorRecord] {
        &self.records
    }

    fn knn(&self, query: &[f64], k: usize) -> Result<Vec<NeighborHit>, AnnError> {
        if query.len() != self.dim {
            return Err(AnnError::DimensionMismatch(format!(
                "query has dimension {}, index holds {}",
                query.len(),
                self.dim
            )));
        }
        let k = k.min(self.records.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut seen = vec![false; self.records.len()];
        let mut candidates: Vec<u32> = Vec::new();
        for (t, table) in self.buckets.iter().enumerate() {
            let sig = self.signature(t, query);
            for_each_probe_mask(self.params.bits_per_table, self.params.probe_radius, &mut |mask| {
                if let Some(members) = table.get(&(sig ^ mask)) {
                    for &idx in members {
                        if !seen[idx as usize] {
                            seen[idx as usize] = true;
                            candidates.push(idx);
                        }
                    }
                }
            });
        }
        Ok(select_k(
            candidates.into_iter().map(|idx| {
                let r = &self.records[idx as usize];
                (r.subspace_id, r.eigen_id, sq_dist_unit(query, &r.vector))
            }),
            k,
        ))
    }
}
