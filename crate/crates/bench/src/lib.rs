//! Benchmark plumbing for nearest-subspace search: synthetic data
//! generation, sample CSV I/O, subspace-model construction, and a
//! harness that scores every search method on label accuracy, recall
//! against the exact projection-kernel scan, and wall-clock latency.
//!
//! The split mirrors how an experiment runs end to end:
//!
//! 1. [`data`] produces or loads labeled sample sets, fits one
//!    subspace per category ([`data::build_subspace_db`]), and carves
//!    held-out samples into query subspaces
//!    ([`data::build_query_subspaces`]).
//! 2. [`harness`] evaluates a method configuration over those queries
//!    ([`harness::evaluate`]), sweeps the retrieval depth `k`
//!    ([`harness::sweep_k`]), and serializes the outcome as CSV rows
//!    with a fixed column set ([`harness::CSV_HEADER`]).
//!
//! Everything is deterministic given the seeds in play; only the
//! timing fields vary between runs.

pub mod data;
pub mod harness;

pub use data::{
    build_query_subspaces, build_subspace_db, gen_synthetic, load_samples, named_seed,
    parse_samples, samples_to_string, save_samples, write_samples, Category, DataError, LabeledDb,
    SampleSet, SynthParams, DEFAULT_QUERY_WINDOWS,
};
pub use harness::{
    build_backend_index, csv_string, evaluate, exact_pk_top1, sweep_k, write_csv, ApproxKind,
    BackendChoice, BenchError, BenchRecord, EvalOptions, MethodConfig, CSV_HEADER,
};
