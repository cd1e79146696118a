//! Command-line surface of the `anss` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anss_core::ann::HashIndexParams;

/// Nearest-subspace search over databases of linear subspaces:
/// synthetic data generation, index construction, querying, and
/// benchmark sweeps.
#[derive(Debug, Parser)]
#[command(name = "anss", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled sample set as two CSV files
    /// (training and held-out query samples).
    Gen(GenArgs),
    /// Fit one subspace per category of a training CSV, build a
    /// search index over them, and save it.
    Index(IndexArgs),
    /// Build one query subspace from every vector in a CSV file and
    /// rank a saved index against it.
    Search(SearchArgs),
    /// Score methods on a training/query CSV pair and write the
    /// results as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of categories (at least 2).
    #[arg(long, default_value_t = 100)]
    pub nsub: usize,
    /// Ambient dimension of the samples.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Dimension of each category's hidden subspace.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Training samples per category; each of the three query windows
    /// holds the same number of held-out samples.
    #[arg(long, default_value_t = 8)]
    pub ntrain: usize,
    /// Per-component noise added to each unit-length in-subspace
    /// point before renormalization.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Where to write the training samples.
    #[arg(long)]
    pub out_train: PathBuf,
    /// Where to write the held-out query samples.
    #[arg(long)]
    pub out_query: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexMethod {
    /// Column-level engine for the approximate kernel measures.
    Apk,
    /// Lifted brute-force baseline.
    Bhz,
    /// Alignment-bit hashing baseline.
    Glh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    /// Exhaustive exact k-NN over the basis columns.
    Exact,
    /// Sign-hyperplane hashing with multi-probing.
    Hash,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Training samples CSV (`label,v1,...,vD` rows).
    #[arg(long)]
    pub train: PathBuf,
    /// Subspace dimension fitted per category.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, value_enum)]
    pub method: IndexMethod,
    /// Inner k-NN backend (apk only).
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Hash tables of the hashed k-NN backend.
    #[arg(long, default_value_t = HashIndexParams::default().tables)]
    pub tables: usize,
    /// Sign bits per hash table.
    #[arg(long, default_value_t = HashIndexParams::default().bits_per_table)]
    pub bits: usize,
    /// Hamming probe radius around each query signature.
    #[arg(long, default_value_t = HashIndexParams::default().probe_radius)]
    pub probes: usize,
    /// Alignment-bit tables (glh only).
    #[arg(long = "S", default_value_t = 100)]
    pub glh_tables: usize,
    /// Random vectors per alignment-bit table (glh only).
    #[arg(long = "K", default_value_t = 3)]
    pub glh_vectors: usize,
    /// Master seed; hyperplane and table draws use named streams
    /// derived from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Where to write the index.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    /// Exact geodesic-distance scan.
    Gd,
    /// Exact projection-kernel scan.
    Pk,
    /// Exact exponentiated-kernel scan.
    Grbf,
    /// Approximate projection kernel through the engine index.
    Apk,
    /// Approximate exponentiated kernel through the engine index.
    Agrbf,
}

/// Retrieval depth: a number, or the symbolic `budget` that resolves
/// to the smallest depth at which the engine is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSpec {
    Budget,
    Depth(usize),
}

impl KSpec {
    pub fn resolve(self, budget: usize) -> usize {
        match self {
            KSpec::Budget => budget,
            KSpec::Depth(k) => k,
        }
    }
}

pub fn parse_k_spec(s: &str) -> Result<KSpec, String> {
    if s == "budget" {
        return Ok(KSpec::Budget);
    }
    s.parse::<usize>()
        .map(KSpec::Depth)
        .map_err(|_| format!("expected a retrieval depth or \"budget\", got {s:?}"))
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Saved index file.
    #[arg(long)]
    pub index: PathBuf,
    /// CSV whose vectors (all rows, labels ignored) form the query
    /// pattern set.
    #[arg(long)]
    pub query: PathBuf,
    /// Retrieval depth per query direction (apk/agrbf only).
    #[arg(long, value_parser = parse_k_spec, default_value = "budget")]
    pub k: KSpec,
    #[arg(long, value_enum)]
    pub measure: MeasureArg,
    /// Kernel sharpness for grbf/agrbf.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// How many results to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gd,
    Pk,
    Grbf,
    Bhz,
    Glh,
    Apk,
    Agrbf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Training samples CSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Held-out query samples CSV (three consecutive windows per
    /// category become query subspaces).
    #[arg(long)]
    pub query: PathBuf,
    /// Subspace dimension for both database and query models.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Comma-separated methods to score, e.g. `pk,apk`.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub methods: Vec<MethodArg>,
    /// Comma-separated retrieval depths (numbers or `budget`) swept
    /// by apk/agrbf; must be strictly ascending.
    #[arg(long = "k-list", value_parser = parse_k_spec, value_delimiter = ',',
          default_value = "budget")]
    pub k_list: Vec<KSpec>,
    /// Timed passes over the query batch per cell.
    #[arg(long, default_value_t = 7)]
    pub repeats: usize,
    /// Master seed, recorded in the CSV and feeding the table draws.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Where to write the results CSV.
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Worker threads across benchmark cells. Each cell still runs
    /// single-threaded; parallel cells make timings less comparable.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}
