//! Labeled sample sets: synthetic generation, CSV persistence, and
//! the conversion of raw samples into database and query subspaces.
//!
//! A [`SampleSet`] holds unit vectors grouped by category label. The
//! benchmark pipeline fits one subspace per category from a training
//! set ([`build_subspace_db`]) and builds query subspaces from
//! consecutive windows of a held-out set
//! ([`build_query_subspaces`]), so classification accuracy measures
//! how well nearest-subspace search recovers the true category.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use anss_core::linalg::{orthonormalize, pca_basis_with, LinalgConfig, LinalgError, Matrix};
use anss_core::{Subspace, SubspaceDB, SubspaceId};

/// How many consecutive query windows each category contributes when
/// a caller does not say otherwise.
pub const DEFAULT_QUERY_WINDOWS: usize = 3;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// A malformed row. `line` is 1-based; 0 means the input as a
    /// whole was unusable (for example, it held no rows at all).
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: row has {found} vector components, expected {expected}")]
    InconsistentDimension { line: usize, expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    /// A category's samples could not support the requested subspace
    /// dimension.
    #[error("category {label:?}: {source}")]
    RankDeficient {
        label: String,
        #[source]
        source: LinalgError,
    },
}

/// One labeled group of sample vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub label: String,
    pub vectors: Vec<Vec<f64>>,
}

/// Sample vectors grouped by category label.
///
/// Invariants, enforced at construction: at least one category, at
/// least one vector per category, every vector of the same
/// dimension, and no two categories sharing a label.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    categories: Vec<Category>,
    dim: usize,
}

impl SampleSet {
    pub fn new(categories: Vec<Category>) -> Result<Self, DataError> {
        let first = categories
            .first()
            .ok_or_else(|| DataError::InvalidParams("need at least one category".into()))?;
        let dim = first
            .vectors
            .first()
            .map(|v| v.len())
            .ok_or_else(|| DataError::InvalidParams("categories cannot be empty".into()))?;
        if dim == 0 {
            return Err(DataError::InvalidParams("vectors need at least one component".into()));
        }
        let mut seen = HashMap::new();
        for (i, cat) in categories.iter().enumerate() {
            if cat.vectors.is_empty() {
                return Err(DataError::InvalidParams(format!(
                    "category {:?} has no vectors",
                    cat.label
                )));
            }
            if let Some(v) = cat.vectors.iter().find(|v| v.len() != dim) {
                return Err(DataError::InvalidParams(format!(
                    "category {:?} mixes dimensions {} and {}",
                    cat.label,
                    dim,
                    v.len()
                )));
            }
            if seen.insert(cat.label.clone(), i).is_some() {
                return Err(DataError::InvalidParams(format!(
                    "duplicate category label {:?}",
                    cat.label
                )));
            }
        }
        Ok(SampleSet { categories, dim })
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    /// Dimension shared by every vector in the set.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn total_vectors(&self) -> usize {
        self.categories.iter().map(|c| c.vectors.len()).sum()
    }
}

/// Derives an independent seed for a named random stream, so the data
/// draw, the hash hyperplanes, and every other consumer of the one
/// user-facing seed can be varied independently.
///
/// The stream name is hashed with FNV-1a, folded with the master
/// seed, and finished with a SplitMix64 round so that nearby master
/// seeds still land far apart.
pub fn named_seed(master: u64, stream: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = h ^ master.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Shape of a synthetic benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Number of categories (hence stored subspaces).
    pub n_sub: usize,
    /// Ambient dimension of every sample.
    pub dim: usize,
    /// Dimension of the hidden subspace each category is drawn from.
    pub m: usize,
    /// Training samples per category.
    pub n_train: usize,
    /// Query windows per category; each window holds `n_train`
    /// held-out samples.
    pub n_query_sets: usize,
    /// Per-component standard deviation of the isotropic noise added
    /// to each unit-length in-subspace point.
    pub noise: f64,
    /// Master seed; every category derives its own stream from it.
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_sub: 100,
            dim: 64,
            m: 5,
            n_train: 8,
            n_query_sets: DEFAULT_QUERY_WINDOWS,
            noise: 0.2,
            seed: 1,
        }
    }
}

/// Generates disjoint training and query sample sets.
///
/// Each category hides one orthonormal `dim x m` basis. A sample is a
/// unit-length random point of that subspace (standard-normal
/// coefficients, rescaled) plus `noise` times an isotropic
/// standard-normal vector, the sum rescaled to unit length again.
/// Training and query samples come from disjoint draws of the same
/// per-category stream, so the two sets never share a vector, and the
/// whole draw is a pure function of the parameters.
pub fn gen_synthetic(params: &SynthParams) -> Result<(SampleSet, SampleSet), DataError> {
    if params.n_sub < 2 {
        return Err(DataError::InvalidParams(format!(
            "need at least 2 categories, got {}",
            params.n_sub
        )));
    }
    if params.m == 0 {
        return Err(DataError::InvalidParams("subspace dimension must be at least 1".into()));
    }
    if params.dim < params.m {
        return Err(DataError::InvalidParams(format!(
            "ambient dimension {} cannot hold {}-dimensional subspaces",
            params.dim, params.m
        )));
    }
    if params.n_train < params.m {
        return Err(DataError::InvalidParams(format!(
            "{} training samples cannot span a {}-dimensional subspace",
            params.n_train, params.m
        )));
    }
    if params.n_query_sets == 0 {
        return Err(DataError::InvalidParams("need at least one query window".into()));
    }
    if !(params.noise >= 0.0 && params.noise.is_finite()) {
        return Err(DataError::InvalidParams(format!(
            "noise must be finite and non-negative, got {}",
            params.noise
        )));
    }

    let mut train = Vec::with_capacity(params.n_sub);
    let mut query = Vec::with_capacity(params.n_sub);
    for c in 0..params.n_sub {
        let label = format!("cat{c:04}");
        let mut rng =
            ChaCha8Rng::seed_from_u64(named_seed(params.seed, &format!("category-{c}")));
        let basis = random_orthonormal(params.dim, params.m, &mut rng)?;
        let train_vecs: Vec<Vec<f64>> =
            (0..params.n_train).map(|_| draw_sample(&basis, params.noise, &mut rng)).collect();
        let query_vecs: Vec<Vec<f64>> = (0..params.n_query_sets * params.n_train)
            .map(|_| draw_sample(&basis, params.noise, &mut rng))
            .collect();
        train.push(Category { label: label.clone(), vectors: train_vecs });
        query.push(Category { label, vectors: query_vecs });
    }
    Ok((SampleSet::new(train)?, SampleSet::new(query)?))
}

fn random_orthonormal(dim: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Matrix, DataError> {
    let columns: Vec<Vec<f64>> =
        (0..m).map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    orthonormalize(&Matrix::from_columns(&columns)).map_err(|e| {
        DataError::InvalidParams(format!("random basis draw was degenerate: {e}"))
    })
}

fn draw_sample(basis: &Matrix, noise: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (dim, m) = (basis.rows(), basis.cols());
    let mut x = vec![0.0; dim];
    for j in 0..m {
        let c: f64 = rng.sample(StandardNormal);
        for (xi, bi) in x.iter_mut().zip(basis.col(j)) {
            *xi += c * bi;
        }
    }
    // Scale the in-subspace point to unit length before adding the
    // noise, so `noise` directly sets the per-component noise-to-signal
    // ratio instead of competing with the random coefficient norm.
    let signal = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if signal > 0.0 {
        for xi in x.iter_mut() {
            *xi /= signal;
        }
    }
    if noise > 0.0 {
        for xi in x.iter_mut() {
            *xi += noise * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for xi in x.iter_mut() {
            *xi /= norm;
        }
    }
    x
}

/// Parses header-free rows of the form `label,v1,...,vD`.
///
/// Rows are grouped by label in first-occurrence order; the order of
/// vectors within a category follows the file. Every error names the
/// offending 1-based line.
pub fn parse_samples(text: &str) -> Result<SampleSet, DataError> {
    let mut order: Vec<Category> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut dim: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.strip_suffix('\r').unwrap_or(raw);
        if row.is_empty() {
            return Err(DataError::Parse { line, message: "empty line".into() });
        }
        let mut fields = row.split(',');
        let label = fields.next().expect("split yields at least one field");
        let mut vector = Vec::new();
        for field in fields {
            let value: f64 = field.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            vector.push(value);
        }
        match dim {
            None => {
                if vector.is_empty() {
                    return Err(DataError::Parse {
                        line,
                        message: "row has no vector components".into(),
                    });
                }
                dim = Some(vector.len());
            }
            Some(d) if vector.len() != d => {
                return Err(DataError::InconsistentDimension {
                    line,
                    expected: d,
                    found: vector.len(),
                });
            }
            Some(_) => {}
        }
        match index.get(label) {
            Some(&pos) => order[pos].vectors.push(vector),
            None => {
                index.insert(label.to_string(), order.len());
                order.push(Category { label: label.to_string(), vectors: vec![vector] });
            }
        }
    }

    if order.is_empty() {
        return Err(DataError::Parse { line: 0, message: "no data rows".into() });
    }
    SampleSet::new(order)
}

/// Loads a sample CSV from disk. See [`parse_samples`] for the format.
pub fn load_samples<P: AsRef<Path>>(path: P) -> Result<SampleSet, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    parse_samples(&text)
}

/// Writes `label,v1,...,vD` rows, one per vector, LF-terminated.
///
/// Floats carry 17 significant digits, enough that loading the file
/// reproduces every value bit for bit.
pub fn write_samples<W: Write>(set: &SampleSet, w: &mut W) -> io::Result<()> {
    for cat in set.categories() {
        for vector in &cat.vectors {
            write!(w, "{}", cat.label)?;
            for x in vector {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// [`write_samples`] into a fresh string.
pub fn samples_to_string(set: &SampleSet) -> String {
    let mut buf = Vec::new();
    write_samples(set, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("sample rows are ASCII")
}

/// Saves a sample set as CSV. See [`write_samples`] for the format.
pub fn save_samples<P: AsRef<Path>>(set: &SampleSet, path: P) -> Result<(), DataError> {
    let path = path.as_ref();
    let wrap = |source| DataError::Io { path: path.display().to_string(), source };
    let file = fs::File::create(path).map_err(wrap)?;
    let mut w = BufWriter::new(file);
    write_samples(set, &mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

/// A subspace database together with the category label behind each
/// stored subspace: subspace id `i` (1-based) models `labels()[i-1]`.
#[derive(Debug, Clone)]
pub struct LabeledDb {
    db: Arc<SubspaceDB>,
    labels: Vec<String>,
}

impl LabeledDb {
    pub fn new(db: Arc<SubspaceDB>, labels: Vec<String>) -> Result<Self, DataError> {
        if db.len() != labels.len() {
            return Err(DataError::InvalidParams(format!(
                "{} subspaces but {} labels",
                db.len(),
                labels.len()
            )));
        }
        Ok(LabeledDb { db, labels })
    }

    pub fn db(&self) -> &Arc<SubspaceDB> {
        &self.db
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Label of the category the given stored subspace models.
    pub fn label_of(&self, id: SubspaceId) -> &str {
        &self.labels[id as usize - 1]
    }
}

/// Fits one `m`-dimensional subspace per category, ids assigned in
/// category order starting at 1.
///
/// The model is the dominant eigenvectors of each category's sample
/// autocorrelation (no centering), which for unit vectors scattered
/// around a linear subspace recovers exactly that subspace. A
/// category whose samples cannot support `m` directions fails with
/// [`DataError::RankDeficient`] naming the label.
pub fn build_subspace_db(samples: &SampleSet, m: usize) -> Result<LabeledDb, DataError> {
    let cfg = LinalgConfig::default();
    let mut bases = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    for cat in samples.categories() {
        let basis = pca_basis_with(&cat.vectors, m, false, &cfg)
            .map_err(|source| DataError::RankDeficient { label: cat.label.clone(), source })?;
        bases.push(basis);
        labels.push(cat.label.clone());
    }
    let db = SubspaceDB::from_bases(bases)
        .map_err(|e| DataError::InvalidParams(e.to_string()))?;
    LabeledDb::new(Arc::new(db), labels)
}

/// Builds one query subspace per consecutive window of each
/// category's samples.
///
/// Every category's vector list is cut into `windows` equal
/// consecutive chunks (any remainder at the end is dropped) and each
/// chunk is fitted the same way as the database models. The returned
/// pairs carry the true category label; the subspace ids simply
/// number the windows from 1 and have no database meaning.
pub fn build_query_subspaces(
    samples: &SampleSet,
    m: usize,
    windows: usize,
) -> Result<Vec<(String, Subspace)>, DataError> {
    if windows == 0 {
        return Err(DataError::InvalidParams("need at least one window".into()));
    }
    let cfg = LinalgConfig::default();
    let mut out = Vec::with_capacity(samples.len() * windows);
    for cat in samples.categories() {
        let width = cat.vectors.len() / windows;
        if width < m {
            return Err(DataError::InvalidParams(format!(
                "category {:?} has {} vectors; {} windows of at least {} samples each need {}",
                cat.label,
                cat.vectors.len(),
                windows,
                m,
                windows * m
            )));
        }
        for w in 0..windows {
            let chunk = &cat.vectors[w * width..(w + 1) * width];
            let basis = pca_basis_with(chunk, m, false, &cfg)
                .map_err(|source| DataError::RankDeficient { label: cat.label.clone(), source })?;
            let id = out.len() as SubspaceId + 1;
            let subspace = Subspace::new(id, basis)
                .map_err(|e| DataError::InvalidParams(e.to_string()))?;
            out.push((cat.label.clone(), subspace));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use anss_core::grassmann::projection_kernel;

    fn unit(v: &[f64]) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }

    #[test]
    fn named_seed_separates_streams_and_masters() {
        assert_eq!(named_seed(7, "data"), named_seed(7, "data"));
        assert_ne!(named_seed(7, "data"), named_seed(7, "hyperplanes"));
        assert_ne!(named_seed(7, "data"), named_seed(8, "data"));
        assert_ne!(named_seed(0, ""), 0);
    }

    #[test]
    fn generation_rejects_degenerate_parameters() {
        let bad = [
            SynthParams { n_sub: 1, ..SynthParams::default() },
            SynthParams { m: 0, ..SynthParams::default() },
            SynthParams { dim: 3, m: 5, ..SynthParams::default() },
            SynthParams { n_train: 4, m: 5, ..SynthParams::default() },
            SynthParams { n_query_sets: 0, ..SynthParams::default() },
            SynthParams { noise: -0.1, ..SynthParams::default() },
            SynthParams { noise: f64::NAN, ..SynthParams::default() },
        ];
        for params in bad {
            assert!(
                matches!(gen_synthetic(&params), Err(DataError::InvalidParams(_))),
                "{params:?} should be rejected"
            );
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let params = SynthParams {
            n_sub: 4,
            dim: 12,
            m: 3,
            n_train: 5,
            n_query_sets: 2,
            noise: 0.3,
            seed: 77,
            ..SynthParams::default()
        };
        let (t1, q1) = gen_synthetic(&params).unwrap();
        let (t2, q2) = gen_synthetic(&params).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(q1, q2);

        let other = gen_synthetic(&SynthParams { seed: 78, ..params }).unwrap();
        assert_ne!(t1, other.0);

        assert_eq!(t1.len(), 4);
        assert_eq!(t1.dim(), 12);
        assert_eq!(t1.total_vectors(), 4 * 5);
        assert_eq!(q1.total_vectors(), 4 * 2 * 5);
        for cat in t1.categories() {
            for v in &cat.vectors {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12, "samples are unit length");
            }
        }
    }

    #[test]
    fn noiseless_draws_recover_each_category_subspace() {
        let params = SynthParams {
            n_sub: 5,
            dim: 16,
            m: 3,
            n_train: 8,
            n_query_sets: 2,
            noise: 0.0,
            seed: 3,
            ..SynthParams::default()
        };
        let (train, query) = gen_synthetic(&params).unwrap();
        let ldb = build_subspace_db(&train, params.m).unwrap();
        let queries = build_query_subspaces(&query, params.m, params.n_query_sets).unwrap();
        assert_eq!(queries.len(), 5 * 2);
        for (label, q) in &queries {
            let own = ldb
                .labels()
                .iter()
                .position(|l| l == label)
                .map(|i| ldb.db().get(i as SubspaceId + 1).unwrap())
                .unwrap();
            let kp = projection_kernel(own, q).unwrap();
            assert!(
                (kp - params.m as f64).abs() < 1e-6,
                "noiseless window should align with its own model, kernel {kp}"
            );
        }
    }

    #[test]
    fn sample_csv_round_trips_bit_for_bit() {
        let (train, _) = gen_synthetic(&SynthParams {
            n_sub: 3,
            dim: 7,
            m: 2,
            n_train: 4,
            n_query_sets: 1,
            noise: 0.25,
            seed: 11,
            ..SynthParams::default()
        })
        .unwrap();
        let text = samples_to_string(&train);
        let back = parse_samples(&text).unwrap();
        assert_eq!(train, back);
        assert_eq!(samples_to_string(&back), text);
    }

    #[test]
    fn files_round_trip_and_missing_files_are_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.csv");
        let (train, _) = gen_synthetic(&SynthParams {
            n_sub: 2,
            dim: 5,
            m: 2,
            n_train: 3,
            n_query_sets: 1,
            noise: 0.1,
            seed: 9,
            ..SynthParams::default()
        })
        .unwrap();
        save_samples(&train, &path).unwrap();
        assert_eq!(load_samples(&path).unwrap(), train);

        let missing = load_samples(dir.path().join("nope.csv"));
        assert!(matches!(missing, Err(DataError::Io { .. })));
    }

    #[test]
    fn parser_reports_one_based_line_numbers() {
        match parse_samples("a,1.0,2.0\nb,oops,2.0\n") {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_samples("a,1.0,2.0\nb,1.0\n") {
            Err(DataError::InconsistentDimension { line, expected, found }) => {
                assert_eq!((line, expected, found), (2, 2, 1));
            }
            other => panic!("expected a dimension error, got {other:?}"),
        }
        match parse_samples("") {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 0),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_samples("a,1.0\n\nb,2.0\n") {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_samples("label-only\n") {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn parser_groups_rows_by_label_in_first_occurrence_order() {
        let set = parse_samples("b,1.0,0.0\na,0.0,1.0\nb,0.5,0.5\n").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.categories()[0].label, "b");
        assert_eq!(set.categories()[0].vectors.len(), 2);
        assert_eq!(set.categories()[1].label, "a");
        assert_eq!(set.dim(), 2);
        assert_eq!(set.categories()[0].vectors[1], vec![0.5, 0.5]);
    }

    #[test]
    fn subspace_db_ids_follow_category_order() {
        let params = SynthParams {
            n_sub: 80,
            dim: 16,
            m: 7,
            n_train: 9,
            n_query_sets: 1,
            noise: 0.1,
            seed: 21,
            ..SynthParams::default()
        };
        let (train, _) = gen_synthetic(&params).unwrap();
        let ldb = build_subspace_db(&train, params.m).unwrap();
        assert_eq!(ldb.db().len(), 80);
        assert_eq!(ldb.db().ambient_dim(), 16);
        assert_eq!(ldb.db().subspace_dim(), 7);
        for (i, cat) in train.categories().iter().enumerate() {
            let id = i as SubspaceId + 1;
            assert_eq!(ldb.label_of(id), cat.label);
            assert_eq!(ldb.db().get(id).unwrap().id(), id);
        }
    }

    #[test]
    fn single_category_still_builds_a_database() {
        let set = SampleSet::new(vec![Category {
            label: "only".into(),
            vectors: vec![unit(&[1.0, 0.2, 0.0]), unit(&[0.9, -0.1, 0.1]), unit(&[1.0, 0.0, 0.05])],
        }])
        .unwrap();
        let ldb = build_subspace_db(&set, 2).unwrap();
        assert_eq!(ldb.db().len(), 1);
        assert_eq!(ldb.label_of(1), "only");
    }

    #[test]
    fn rank_deficiency_names_the_offending_category() {
        let set = SampleSet::new(vec![
            Category {
                label: "fine".into(),
                vectors: vec![unit(&[1.0, 0.1, 0.0]), unit(&[0.1, 1.0, 0.0]), unit(&[1.0, 1.0, 0.1])],
            },
            Category {
                label: "flat".into(),
                vectors: vec![unit(&[1.0, 2.0, 3.0]); 5],
            },
        ])
        .unwrap();
        match build_subspace_db(&set, 2) {
            Err(DataError::RankDeficient { label, .. }) => assert_eq!(label, "flat"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn query_windows_are_consecutive_and_drop_the_remainder() {
        let set = SampleSet::new(vec![Category {
            label: "c".into(),
            vectors: vec![
                unit(&[1.0, 0.01, 0.0]),
                unit(&[1.0, -0.01, 0.0]),
                unit(&[0.01, 1.0, 0.0]),
                unit(&[-0.01, 1.0, 0.0]),
                unit(&[0.0, 0.0, 1.0]), // fifth vector: dropped by 2 windows of 2
            ],
        }])
        .unwrap();
        let queries = build_query_subspaces(&set, 1, 2).unwrap();
        assert_eq!(queries.len(), 2);
        let b0 = queries[0].1.basis();
        let b1 = queries[1].1.basis();
        assert!(b0.get(0, 0).abs() > 0.99, "first window hugs the first axis");
        assert!(b1.get(1, 0).abs() > 0.99, "second window hugs the second axis");
        assert_eq!(queries[0].1.id(), 1);
        assert_eq!(queries[1].1.id(), 2);
    }

    #[test]
    fn query_windows_reject_slices_thinner_than_m() {
        let set = SampleSet::new(vec![Category {
            label: "c".into(),
            vectors: vec![unit(&[1.0, 0.0, 0.1]), unit(&[0.0, 1.0, 0.1]), unit(&[1.0, 1.0, 0.0])],
        }])
        .unwrap();
        assert!(matches!(
            build_query_subspaces(&set, 2, 2),
            Err(DataError::InvalidParams(_))
        ));
        assert!(matches!(
            build_query_subspaces(&set, 1, 0),
            Err(DataError::InvalidParams(_))
        ));
    }
}
