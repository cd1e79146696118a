//! Scores search methods against labeled query subspaces.
//!
//! [`evaluate`] runs one method configuration over a query batch and
//! reports label accuracy, agreement with the exact projection-kernel
//! scan, and mean wall-clock latency; [`sweep_k`] repeats that across
//! retrieval depths while sharing one index build. Results serialize
//! to CSV with a fixed column set ([`CSV_HEADER`]).
//!
//! Two quality numbers are kept deliberately distinct: `top1_accuracy`
//! asks whether the returned top subspace carries the query's true
//! category label (so it also measures how well the subspace models
//! fit), while `recall_vs_pk` asks whether the method returned the
//! same top subspace as the exact projection-kernel scan (isolating
//! pure search quality).

use std::io;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use anss_core::ann::{AnnBackend, AnnError, ExactIndex, HashIndex, HashIndexParams};
use anss_core::baselines::{
    bhz_lift_all, bhz_search, glh_build, glh_query, BaselineError, GlhIndex, LiftedPoint,
};
use anss_core::engine::{basis_records, AnssIndex, ApproxMeasure, EngineError, ScoreTable};
use anss_core::grassmann::{exact_nearest_subspaces, GrassmannError};
use anss_core::{Measure, Subspace, SubspaceDB, SubspaceId};

use crate::data::LabeledDb;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Ann(#[from] AnnError),
}

/// Which inner k-NN index the approximate engine runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum BackendChoice {
    /// Exhaustive exact k-NN over the basis columns.
    Exact,
    /// Sign-hyperplane hashing with multi-probing.
    Hash(HashIndexParams),
}

impl BackendChoice {
    pub fn label(&self) -> &'static str {
        match self {
            BackendChoice::Exact => "exact",
            BackendChoice::Hash(_) => "hash",
        }
    }
}

/// One fully-parameterized search method.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodConfig {
    /// Exact scan by geodesic distance.
    Geodesic,
    /// Exact scan by projection kernel.
    ProjectionKernel,
    /// Exact scan by the exponentiated projection kernel.
    Grbf { beta: f64 },
    /// Brute force over the lifted projection-matrix coordinates.
    Bhz,
    /// Hashing on vector-in-subspace alignment bits, ranked by
    /// geodesic distance among candidates.
    Glh { tables: usize, vectors_per_table: usize, seed: u64 },
    /// Column-level approximate projection kernel at retrieval
    /// depth `k`.
    Apk { k: usize, backend: BackendChoice },
    /// Column-level approximate exponentiated kernel at retrieval
    /// depth `k`.
    Agrbf { k: usize, beta: f64, backend: BackendChoice },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Geodesic => "GD",
            MethodConfig::ProjectionKernel => "PK",
            MethodConfig::Grbf { .. } => "GRBF",
            MethodConfig::Bhz => "BHZ",
            MethodConfig::Glh { .. } => "GLH",
            MethodConfig::Apk { .. } => "APK",
            MethodConfig::Agrbf { .. } => "AGRBF",
        }
    }

    fn backend_label(&self) -> Option<&'static str> {
        match self {
            MethodConfig::Apk { backend, .. } | MethodConfig::Agrbf { backend, .. } => {
                Some(backend.label())
            }
            _ => None,
        }
    }

    fn k_param(&self) -> Option<usize> {
        match self {
            MethodConfig::Apk { k, .. } | MethodConfig::Agrbf { k, .. } => Some(*k),
            _ => None,
        }
    }

    fn table_params(&self) -> (Option<usize>, Option<usize>) {
        match self {
            MethodConfig::Glh { tables, vectors_per_table, .. } => {
                (Some(*tables), Some(*vectors_per_table))
            }
            _ => (None, None),
        }
    }

    fn beta_param(&self) -> Option<f64> {
        match self {
            MethodConfig::Grbf { beta } | MethodConfig::Agrbf { beta, .. } => Some(*beta),
            _ => None,
        }
    }
}

/// Retrieval-depth sweep axis: which approximate measure to score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproxKind {
    Apk,
    Agrbf { beta: f64 },
}

/// Evaluation knobs that are not part of the method itself.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// How many timed passes over the full query batch to average.
    pub repeats: usize,
    /// Run one untimed pass before the timed ones.
    pub warmup: bool,
    /// Recorded verbatim in the output's `seed` column so rows stay
    /// traceable to the draw that produced their data; carries no
    /// randomness of its own.
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { repeats: 7, warmup: false, seed: 0 }
    }
}

/// One method's scores on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: &'static str,
    /// Inner k-NN backend, for the methods that have one.
    pub backend: Option<&'static str>,
    /// Retrieval depth, for the approximate engine methods.
    pub k: Option<usize>,
    /// Hash tables, for the alignment-bit hashing baseline.
    pub tables: Option<usize>,
    /// Random vectors per table, for the same baseline.
    pub vectors_per_table: Option<usize>,
    /// Kernel sharpness, for the exponentiated measures.
    pub beta: Option<f64>,
    pub m: usize,
    pub dim: usize,
    pub n_sub: usize,
    /// Fraction of queries whose top-1 subspace carries the query's
    /// true category label.
    pub top1_accuracy: f64,
    /// Fraction of queries whose top-1 subspace equals the exact
    /// projection-kernel scan's top-1.
    pub recall_vs_pk: f64,
    /// Mean wall-clock seconds per query over all timed passes.
    pub mean_query_seconds: f64,
    /// Wall-clock seconds spent building the method's index, measured
    /// separately from the query passes.
    pub build_seconds: f64,
    /// Queries in the batch.
    pub queries: usize,
    /// Queries answered by ranking every stored subspace because
    /// hashing degenerated — the candidate set came up empty, or one
    /// bucket held the whole database. Always 0 for methods that scan
    /// everything by design.
    pub fallbacks: usize,
    /// Copied from [`EvalOptions::seed`].
    pub seed: u64,
}

/// Column set of the benchmark CSV, in emission order.
pub const CSV_HEADER: &str = "method,backend,k,S,K,beta,m,D,N_sub,top1_accuracy,\
                              recall_vs_pk,mean_query_seconds,build_seconds,fallbacks,seed";

/// Nine significant digits, scientific notation.
fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

impl BenchRecord {
    /// One CSV row matching [`CSV_HEADER`]. Columns that do not apply
    /// to the method are left empty; floats carry nine significant
    /// digits.
    pub fn csv_line(&self) -> String {
        let opt_count = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_float = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.backend.unwrap_or(""),
            opt_count(self.k),
            opt_count(self.tables),
            opt_count(self.vectors_per_table),
            opt_float(self.beta),
            self.m,
            self.dim,
            self.n_sub,
            fmt_sig9(self.top1_accuracy),
            fmt_sig9(self.recall_vs_pk),
            fmt_sig9(self.mean_query_seconds),
            fmt_sig9(self.build_seconds),
            self.fallbacks,
            self.seed,
        )
    }
}

/// Header plus one LF-terminated row per record.
pub fn csv_string(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_csv<W: io::Write>(records: &[BenchRecord], w: &mut W) -> io::Result<()> {
    w.write_all(csv_string(records).as_bytes())
}

/// Builds the approximate engine's column index on the chosen inner
/// backend, boxed so exact and hashed indexes share one engine type.
pub fn build_backend_index(
    db: &Arc<SubspaceDB>,
    backend: &BackendChoice,
) -> Result<AnssIndex<Box<dyn AnnBackend>>, BenchError> {
    let records = basis_records(db);
    let boxed: Box<dyn AnnBackend> = match backend {
        BackendChoice::Exact => Box::new(ExactIndex::build(records)?),
        BackendChoice::Hash(params) => Box::new(HashIndex::build(records, params.clone())?),
    };
    Ok(AnssIndex::from_backend(Arc::clone(db), boxed)?)
}

/// Exact projection-kernel top-1 id for every query, the reference
/// that `recall_vs_pk` scores against.
pub fn exact_pk_top1(
    db: &SubspaceDB,
    queries: &[(String, Subspace)],
) -> Result<Vec<SubspaceId>, BenchError> {
    queries
        .iter()
        .map(|(_, q)| {
            let ranked = exact_nearest_subspaces(db, q, Measure::ProjectionKernel, 1)?;
            Ok(ranked[0].0)
        })
        .collect()
}

/// Whatever a method needs built before it can answer queries.
enum MethodIndex {
    /// Exact scans rank straight off the database.
    None,
    Bhz(Vec<LiftedPoint>),
    Glh(GlhIndex),
    Engine(AnssIndex<Box<dyn AnnBackend>>),
}

fn build_method_index(cfg: &MethodConfig, db: &Arc<SubspaceDB>) -> Result<MethodIndex, BenchError> {
    Ok(match cfg {
        MethodConfig::Geodesic | MethodConfig::ProjectionKernel | MethodConfig::Grbf { .. } => {
            MethodIndex::None
        }
        MethodConfig::Bhz => MethodIndex::Bhz(bhz_lift_all(db)),
        MethodConfig::Glh { tables, vectors_per_table, seed } => {
            MethodIndex::Glh(glh_build(Arc::clone(db), *tables, *vectors_per_table, *seed)?)
        }
        MethodConfig::Apk { backend, .. } | MethodConfig::Agrbf { backend, .. } => {
            MethodIndex::Engine(build_backend_index(db, backend)?)
        }
    })
}

/// Answers one query: the top-1 subspace id, plus whether the answer
/// came from ranking the entire database after hashing degenerated
/// (meaningful for the alignment-bit baseline only).
fn top1(
    cfg: &MethodConfig,
    db: &SubspaceDB,
    index: &MethodIndex,
    scratch: &mut ScoreTable,
    query: &Subspace,
) -> Result<(SubspaceId, bool), BenchError> {
    let first = |ranked: Vec<(SubspaceId, f64)>| {
        ranked.first().map(|&(id, _)| id).expect("databases are never empty")
    };
    match (cfg, index) {
        (MethodConfig::Geodesic, _) => {
            Ok((first(exact_nearest_subspaces(db, query, Measure::Geodesic, 1)?), false))
        }
        (MethodConfig::ProjectionKernel, _) => {
            Ok((first(exact_nearest_subspaces(db, query, Measure::ProjectionKernel, 1)?), false))
        }
        (MethodConfig::Grbf { beta }, _) => Ok((
            first(exact_nearest_subspaces(db, query, Measure::Grbf { beta: *beta }, 1)?),
            false,
        )),
        (MethodConfig::Bhz, MethodIndex::Bhz(lifted)) => {
            Ok((first(bhz_search(lifted, query, 1)?), false))
        }
        (MethodConfig::Glh { .. }, MethodIndex::Glh(glh)) => {
            let answer = glh_query(glh, query, 1)?;
            let scanned_all = answer.fallback || answer.candidates == db.len();
            Ok((first(answer.ranking), scanned_all))
        }
        (MethodConfig::Apk { k, .. }, MethodIndex::Engine(engine)) => {
            Ok((first(engine.search_with(scratch, query, *k, ApproxMeasure::Apk, 1)?), false))
        }
        (MethodConfig::Agrbf { k, beta, .. }, MethodIndex::Engine(engine)) => {
            let ranked =
                engine.search_with(scratch, query, *k, ApproxMeasure::Agrbf { beta: *beta }, 1)?;
            Ok((first(ranked), false))
        }
        _ => unreachable!("method index always built from the same configuration"),
    }
}

fn validate(queries: &[(String, Subspace)], opts: &EvalOptions) -> Result<(), BenchError> {
    if queries.is_empty() {
        return Err(BenchError::InvalidParams("need at least one query".into()));
    }
    if opts.repeats == 0 {
        return Err(BenchError::InvalidParams("need at least one timed pass".into()));
    }
    Ok(())
}

/// Scores one prepared method over the batch: an untimed pass for the
/// quality numbers, then `opts.repeats` timed passes for the latency.
fn run_cell(
    cfg: &MethodConfig,
    ldb: &LabeledDb,
    queries: &[(String, Subspace)],
    opts: &EvalOptions,
    index: &MethodIndex,
    build_seconds: f64,
    pk_truth: &[SubspaceId],
) -> Result<BenchRecord, BenchError> {
    let db = ldb.db();
    let mut scratch = ScoreTable::new(db.len(), db.subspace_dim());

    let mut label_hits = 0usize;
    let mut recall_hits = 0usize;
    let mut full_scans = 0usize;
    for ((label, query), truth) in queries.iter().zip(pk_truth) {
        let (top, scanned_all) = top1(cfg, db, index, &mut scratch, query)?;
        if ldb.label_of(top) == label {
            label_hits += 1;
        }
        if top == *truth {
            recall_hits += 1;
        }
        if scanned_all {
            full_scans += 1;
        }
    }

    if opts.warmup {
        for (_, query) in queries {
            top1(cfg, db, index, &mut scratch, query)?;
        }
    }
    let mut sink = 0u64;
    let started = Instant::now();
    for _ in 0..opts.repeats {
        for (_, query) in queries {
            let (top, _) = top1(cfg, db, index, &mut scratch, query)?;
            sink ^= u64::from(top);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    std::hint::black_box(sink);

    let n_queries = queries.len();
    let (tables, vectors_per_table) = cfg.table_params();
    Ok(BenchRecord {
        method: cfg.name(),
        backend: cfg.backend_label(),
        k: cfg.k_param(),
        tables,
        vectors_per_table,
        beta: cfg.beta_param(),
        m: db.subspace_dim(),
        dim: db.ambient_dim(),
        n_sub: db.len(),
        top1_accuracy: label_hits as f64 / n_queries as f64,
        recall_vs_pk: recall_hits as f64 / n_queries as f64,
        mean_query_seconds: elapsed / (opts.repeats * n_queries) as f64,
        build_seconds,
        queries: n_queries,
        fallbacks: full_scans,
        seed: opts.seed,
    })
}

/// Evaluates one method over a labeled query batch.
///
/// The method's index is built first and timed separately
/// (`build_seconds`); the quality numbers come from one untimed pass
/// and the latency from `opts.repeats` timed passes over the whole
/// batch. Everything except the two timing fields is a deterministic
/// function of the inputs.
pub fn evaluate(
    cfg: &MethodConfig,
    ldb: &LabeledDb,
    queries: &[(String, Subspace)],
    opts: &EvalOptions,
) -> Result<BenchRecord, BenchError> {
    validate(queries, opts)?;
    let started = Instant::now();
    let index = build_method_index(cfg, ldb.db())?;
    let build_seconds = started.elapsed().as_secs_f64();
    let pk_truth = exact_pk_top1(ldb.db(), queries)?;
    run_cell(cfg, ldb, queries, opts, &index, build_seconds, &pk_truth)
}

/// Evaluates the approximate engine at every retrieval depth in
/// `k_values` (which must be nonempty, positive, and strictly
/// ascending) for every requested measure.
///
/// The column index is built once and shared by all cells — it does
/// not depend on `k` — so every record reports the same
/// `build_seconds`. Records come out measure-major: all depths for
/// the first measure, then all depths for the next.
pub fn sweep_k(
    ldb: &LabeledDb,
    queries: &[(String, Subspace)],
    k_values: &[usize],
    backend: &BackendChoice,
    measures: &[ApproxKind],
    opts: &EvalOptions,
) -> Result<Vec<BenchRecord>, BenchError> {
    validate(queries, opts)?;
    if k_values.is_empty() {
        return Err(BenchError::InvalidParams("need at least one retrieval depth".into()));
    }
    if k_values[0] == 0 {
        return Err(BenchError::InvalidParams("retrieval depths start at 1".into()));
    }
    if !k_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(BenchError::InvalidParams(
            "retrieval depths must be strictly ascending".into(),
        ));
    }
    if measures.is_empty() {
        return Ok(Vec::new());
    }

    let started = Instant::now();
    let index = MethodIndex::Engine(build_backend_index(ldb.db(), backend)?);
    let build_seconds = started.elapsed().as_secs_f64();
    let pk_truth = exact_pk_top1(ldb.db(), queries)?;

    let mut records = Vec::with_capacity(measures.len() * k_values.len());
    for measure in measures {
        for &k in k_values {
            let cfg = match *measure {
                ApproxKind::Apk => MethodConfig::Apk { k, backend: backend.clone() },
                ApproxKind::Agrbf { beta } => {
                    MethodConfig::Agrbf { k, beta, backend: backend.clone() }
                }
            };
            records.push(run_cell(&cfg, ldb, queries, opts, &index, build_seconds, &pk_truth)?);
        }
    }
    Ok(records)
}
