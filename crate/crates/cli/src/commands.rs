//! What each subcommand actually does.

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anss_bench::{
    build_query_subspaces, build_subspace_db, evaluate, gen_synthetic, load_samples, named_seed,
    save_samples, write_csv, BackendChoice, BenchError, BenchRecord, EvalOptions, LabeledDb,
    MethodConfig, SampleSet, SynthParams, DEFAULT_QUERY_WINDOWS,
};
use anss_core::ann::{AnnBackend, AnnError, ExactIndex, HashIndex, HashIndexParams};
use anss_core::baselines::{bhz_lift_all, glh_build, BaselineError};
use anss_core::engine::{basis_records, index_database_exact, AnssIndex, ApproxMeasure};
use anss_core::linalg::{pca_basis_with, LinalgConfig, Matrix};
use anss_core::{Measure, Subspace, SubspaceDB};

use crate::args::{
    BackendArg, BenchArgs, Cli, Command, GenArgs, IndexArgs, IndexMethod, MeasureArg, MethodArg,
    SearchArgs,
};
use crate::index_file::{read_index, write_index, StoredBackend, StoredIndex};
use crate::CliError;

/// Kernel sharpness used by the benchmark's exponentiated measures:
/// the exponent never changes a ranking, so one value suffices.
const BENCH_BETA: f64 = 1.0;
/// Alignment-bit table shape used by the benchmark's hashing
/// baseline.
const BENCH_GLH_TABLES: usize = 100;
const BENCH_GLH_VECTORS: usize = 3;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Index(args) => cmd_index(args),
        Command::Search(args) => cmd_search(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn ann_err(e: AnnError) -> CliError {
    match e {
        AnnError::BadParams(_) => CliError::Usage(e.to_string()),
        _ => CliError::Data(e.to_string()),
    }
}

fn baseline_err(e: BaselineError) -> CliError {
    match e {
        BaselineError::BadParams(_) => CliError::Usage(e.to_string()),
        BaselineError::DimensionMismatch(_) => CliError::Mismatch(e.to_string()),
        _ => CliError::Data(e.to_string()),
    }
}

pub fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let params = SynthParams {
        n_sub: args.nsub,
        dim: args.dim,
        m: args.m,
        n_train: args.ntrain,
        n_query_sets: DEFAULT_QUERY_WINDOWS,
        noise: args.noise,
        seed: args.seed,
    };
    let (train, query) = gen_synthetic(&params)?;
    save_samples(&train, &args.out_train)?;
    save_samples(&query, &args.out_query)?;
    Ok(())
}

pub fn cmd_index(args: IndexArgs) -> Result<(), CliError> {
    let samples = load_samples(&args.train)?;
    let started = Instant::now();
    let ldb = build_subspace_db(&samples, args.m)?;
    let db = ldb.db();
    let backend = match args.method {
        IndexMethod::Apk => match args.backend {
            BackendArg::Exact => {
                index_database_exact(Arc::clone(db))
                    .map_err(|e| CliError::Data(e.to_string()))?;
                StoredBackend::ApkExact
            }
            BackendArg::Hash => {
                let params = HashIndexParams {
                    tables: args.tables,
                    bits_per_table: args.bits,
                    probe_radius: args.probes,
                    seed: named_seed(args.seed, "hyperplanes"),
                };
                let index = HashIndex::build(basis_records(db), params).map_err(ann_err)?;
                StoredBackend::ApkHash {
                    params: *index.params(),
                    hyperplanes: index.hyperplanes().to_vec(),
                    buckets: index.buckets_to_bytes(),
                }
            }
        },
        IndexMethod::Bhz => {
            let lifted = bhz_lift_all(db);
            std::hint::black_box(&lifted);
            StoredBackend::Bhz
        }
        IndexMethod::Glh => {
            let tables = u32::try_from(args.glh_tables)
                .map_err(|_| CliError::Usage(format!("--S {} is too large", args.glh_tables)))?;
            let vectors_per_table = u32::try_from(args.glh_vectors)
                .map_err(|_| CliError::Usage(format!("--K {} is too large", args.glh_vectors)))?;
            let glh = glh_build(
                Arc::clone(db),
                args.glh_tables,
                args.glh_vectors,
                named_seed(args.seed, "glh"),
            )
            .map_err(baseline_err)?;
            StoredBackend::Glh {
                tables,
                vectors_per_table,
                seed: glh.seed(),
                vectors: glh.random_vectors().to_vec(),
            }
        }
    };
    let build_seconds = started.elapsed().as_secs_f64();
    let stored = StoredIndex::from_db(db, backend);
    let label = stored.backend.tag().label();
    write_index(&stored, &args.out)?;
    eprintln!("built {} for {} subspaces in {:.3} s", label, db.len(), build_seconds);
    Ok(())
}

fn measure_name(measure: MeasureArg) -> &'static str {
    match measure {
        MeasureArg::Gd => "gd",
        MeasureArg::Pk => "pk",
        MeasureArg::Grbf => "grbf",
        MeasureArg::Apk => "apk",
        MeasureArg::Agrbf => "agrbf",
    }
}

fn rebuild_db(stored: &StoredIndex) -> Result<Arc<SubspaceDB>, CliError> {
    let (d, m) = (stored.dim as usize, stored.m as usize);
    let bases: Vec<Matrix> = stored
        .bases
        .chunks_exact(d * m)
        .map(|chunk| Matrix::from_col_major(d, m, chunk.to_vec()))
        .collect();
    let db = SubspaceDB::from_bases(bases)
        .map_err(|e| CliError::Data(format!("stored bases are unusable: {e}")))?;
    Ok(Arc::new(db))
}

/// One subspace from every vector in the file, labels ignored.
fn query_subspace(samples: &SampleSet, m: usize) -> Result<Subspace, CliError> {
    let vectors: Vec<Vec<f64>> =
        samples.categories().iter().flat_map(|c| c.vectors.iter().cloned()).collect();
    let basis = pca_basis_with(&vectors, m, false, &LinalgConfig::default())
        .map_err(|e| CliError::Data(format!("query pattern set: {e}")))?;
    Subspace::new(1, basis).map_err(|e| CliError::Data(e.to_string()))
}

fn live_engine(
    stored: &StoredIndex,
    db: &Arc<SubspaceDB>,
) -> Result<AnssIndex<Box<dyn AnnBackend>>, CliError> {
    let backend: Box<dyn AnnBackend> = match &stored.backend {
        StoredBackend::ApkExact => {
            Box::new(ExactIndex::build(basis_records(db)).map_err(ann_err)?)
        }
        StoredBackend::ApkHash { params, hyperplanes, buckets } => Box::new(
            HashIndex::from_parts(basis_records(db), *params, hyperplanes.clone(), Some(buckets))
                .map_err(|e| CliError::Data(e.to_string()))?,
        ),
        other => {
            return Err(CliError::Mismatch(format!(
                "not an engine index: found {}",
                other.tag().label()
            )))
        }
    };
    AnssIndex::from_backend(Arc::clone(db), backend).map_err(|e| CliError::Data(e.to_string()))
}

pub fn cmd_search(args: SearchArgs) -> Result<(), CliError> {
    if args.top == 0 {
        return Err(CliError::Usage("--top must be at least 1".into()));
    }
    if matches!(args.measure, MeasureArg::Grbf | MeasureArg::Agrbf) && !(args.beta > 0.0) {
        return Err(CliError::Usage(format!("--beta must be positive, got {}", args.beta)));
    }
    let stored = read_index(&args.index)?;
    let samples = load_samples(&args.query)?;
    if samples.dim() != stored.dim as usize {
        return Err(CliError::Mismatch(format!(
            "query vectors have {} components, the index holds dimension {}",
            samples.dim(),
            stored.dim
        )));
    }
    let db = rebuild_db(&stored)?;
    let query = query_subspace(&samples, stored.m as usize)?;

    let scan = |measure: Measure| {
        exact_nearest_subspaces_cli(&db, &query, measure, args.top)
    };
    let ranking = match args.measure {
        MeasureArg::Gd => scan(Measure::Geodesic)?,
        MeasureArg::Pk => scan(Measure::ProjectionKernel)?,
        MeasureArg::Grbf => scan(Measure::Grbf { beta: args.beta })?,
        MeasureArg::Apk | MeasureArg::Agrbf => {
            if !matches!(
                stored.backend,
                StoredBackend::ApkExact | StoredBackend::ApkHash { .. }
            ) {
                return Err(CliError::Mismatch(format!(
                    "measure {} needs an engine index, found {}",
                    measure_name(args.measure),
                    stored.backend.tag().label()
                )));
            }
            let engine = live_engine(&stored, &db)?;
            let k = args.k.resolve(engine.exactness_budget());
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            let measure = match args.measure {
                MeasureArg::Apk => ApproxMeasure::Apk,
                _ => ApproxMeasure::Agrbf { beta: args.beta },
            };
            engine
                .search(&query, k, measure, args.top)
                .map_err(|e| CliError::Data(e.to_string()))?
        }
    };

    let mut out = String::new();
    for (i, (id, score)) in ranking.iter().enumerate() {
        out.push_str(&format!("{},{},{score:.8e}\n", i + 1, id));
    }
    print!("{out}");
    Ok(())
}

fn exact_nearest_subspaces_cli(
    db: &SubspaceDB,
    query: &Subspace,
    measure: Measure,
    top: usize,
) -> Result<Vec<(anss_core::SubspaceId, f64)>, CliError> {
    anss_core::grassmann::exact_nearest_subspaces(db, query, measure, top)
        .map_err(|e| CliError::Data(e.to_string()))
}

pub fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    if args.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let train = load_samples(&args.train)?;
    let query = load_samples(&args.query)?;
    let ldb = build_subspace_db(&train, args.m)?;
    let queries = build_query_subspaces(&query, args.m, DEFAULT_QUERY_WINDOWS)?;

    let budget = anss_core::engine::exactness_budget(ldb.db().len(), args.m);
    let depths: Vec<usize> = args.k_list.iter().map(|spec| spec.resolve(budget)).collect();
    if depths.iter().any(|&k| k == 0) {
        return Err(CliError::Usage("retrieval depths start at 1".into()));
    }
    if !depths.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Usage(format!(
            "--k-list must be strictly ascending once budget={budget} is substituted, got {depths:?}"
        )));
    }

    let mut cells: Vec<MethodConfig> = Vec::new();
    for method in &args.methods {
        match method {
            MethodArg::Gd => cells.push(MethodConfig::Geodesic),
            MethodArg::Pk => cells.push(MethodConfig::ProjectionKernel),
            MethodArg::Grbf => cells.push(MethodConfig::Grbf { beta: BENCH_BETA }),
            MethodArg::Bhz => cells.push(MethodConfig::Bhz),
            MethodArg::Glh => cells.push(MethodConfig::Glh {
                tables: BENCH_GLH_TABLES,
                vectors_per_table: BENCH_GLH_VECTORS,
                seed: named_seed(args.seed, "glh"),
            }),
            MethodArg::Apk => {
                for &k in &depths {
                    cells.push(MethodConfig::Apk { k, backend: BackendChoice::Exact });
                }
            }
            MethodArg::Agrbf => {
                for &k in &depths {
                    cells.push(MethodConfig::Agrbf {
                        k,
                        beta: BENCH_BETA,
                        backend: BackendChoice::Exact,
                    });
                }
            }
        }
    }

    let opts = EvalOptions { repeats: args.repeats, warmup: false, seed: args.seed };
    let records = run_cells(&cells, &ldb, &queries, &opts, args.threads)?;

    let mut file = fs::File::create(&args.out_csv)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out_csv.display())))?;
    write_csv(&records, &mut file)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out_csv.display())))?;
    print_summary(&records);
    Ok(())
}

/// Evaluates every cell, optionally spreading independent cells over
/// worker threads. Results keep the cell order; each cell itself
/// stays single-threaded.
fn run_cells(
    cells: &[MethodConfig],
    ldb: &LabeledDb,
    queries: &[(String, Subspace)],
    opts: &EvalOptions,
    threads: usize,
) -> Result<Vec<BenchRecord>, CliError> {
    if threads <= 1 || cells.len() <= 1 {
        return cells
            .iter()
            .map(|cfg| evaluate(cfg, ldb, queries, opts).map_err(CliError::from))
            .collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<BenchRecord, BenchError>>>> =
        (0..cells.len()).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.min(cells.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let outcome = evaluate(&cells[i], ldb, queries, opts);
                *slots[i].lock().expect("no panics while holding the lock") = Some(outcome);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("no panics while holding the lock")
                .expect("every cell index was claimed by a worker")
                .map_err(CliError::from)
        })
        .collect()
}

/// Per-method best accuracy, plus how much faster the approximate
/// engine answers than the exact kernel scan once it matches the
/// scan's accuracy.
fn print_summary(records: &[BenchRecord]) {
    let mut order: Vec<&'static str> = Vec::new();
    for r in records {
        if !order.contains(&r.method) {
            order.push(r.method);
        }
    }
    for name in order {
        let best = records
            .iter()
            .filter(|r| r.method == name)
            .map(|r| r.top1_accuracy)
            .fold(f64::NEG_INFINITY, f64::max);
        println!("{name}: best top-1 accuracy {best:.4}");
    }
    let pk = records.iter().find(|r| r.method == "PK");
    if let Some(pk) = pk {
        if records.iter().any(|r| r.method == "APK") {
            let matched = records
                .iter()
                .filter(|r| r.method == "APK" && r.top1_accuracy >= pk.top1_accuracy)
                .min_by(|a, b| a.mean_query_seconds.total_cmp(&b.mean_query_seconds));
            match matched {
                Some(apk) => println!(
                    "APK reaches PK accuracy at k={} and answers {:.2}x faster than the scan",
                    apk.k.unwrap_or(0),
                    pk.mean_query_seconds / apk.mean_query_seconds
                ),
                None => println!("APK never reaches PK accuracy in this sweep"),
            }
        }
    }
}
