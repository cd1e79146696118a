//! The on-disk index format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    8 bytes  "GSANSS01"
//! header   5 x u32  D, m, N_sub, backend tag, section count
//! sections repeated u64 byte length, then that many payload bytes
//! ```
//!
//! Section 0 always holds the subspace bases: for every subspace in
//! id order, its `D x m` basis as little-endian f64 in column-major
//! order — `N_sub * D * m * 8` bytes in total. What follows depends
//! on the backend tag:
//!
//! | tag | backend                    | sections after the bases          |
//! |-----|----------------------------|-----------------------------------|
//! | 1   | engine over exact k-NN     | none                              |
//! | 2   | engine over hashed k-NN    | hash parameters, hyperplane
//! |     |                            | coefficients, bucket tables       |
//! | 3   | lifted brute force         | none (the lift is recomputed)     |
//! | 4   | alignment-bit hashing      | table parameters, random vectors  |
//!
//! Serialization is canonical: serialize → deserialize → serialize
//! reproduces the input byte for byte, which the tests pin down.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use anss_core::ann::HashIndexParams;
use anss_core::SubspaceDB;

pub const MAGIC: [u8; 8] = *b"GSANSS01";

#[derive(Debug, Error)]
pub enum IndexFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed index file: {0}")]
    Format(String),
}

fn format_err<T>(msg: impl Into<String>) -> Result<T, IndexFileError> {
    Err(IndexFileError::Format(msg.into()))
}

/// Which live search structure the file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendTag {
    ApkExact = 1,
    ApkHash = 2,
    Bhz = 3,
    Glh = 4,
}

impl BackendTag {
    pub fn from_u32(v: u32) -> Option<BackendTag> {
        match v {
            1 => Some(BackendTag::ApkExact),
            2 => Some(BackendTag::ApkHash),
            3 => Some(BackendTag::Bhz),
            4 => Some(BackendTag::Glh),
            _ => None,
        }
    }

    pub fn section_count(self) -> u32 {
        match self {
            BackendTag::ApkExact | BackendTag::Bhz => 1,
            BackendTag::ApkHash => 4,
            BackendTag::Glh => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BackendTag::ApkExact => "engine index over exact k-NN",
            BackendTag::ApkHash => "engine index over hashed k-NN",
            BackendTag::Bhz => "lifted brute-force index",
            BackendTag::Glh => "alignment-bit hashing index",
        }
    }
}

/// Backend-specific payload, mirroring the file's trailing sections.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredBackend {
    ApkExact,
    ApkHash {
        params: HashIndexParams,
        /// `tables * bits_per_table * D` coefficients.
        hyperplanes: Vec<f64>,
        /// Opaque bucket-table bytes, validated when the live index
        /// is rebuilt.
        buckets: Vec<u8>,
    },
    Bhz,
    Glh {
        tables: u32,
        vectors_per_table: u32,
        seed: u64,
        /// `tables * vectors_per_table` unit vectors of dimension `D`.
        vectors: Vec<f64>,
    },
}

impl StoredBackend {
    pub fn tag(&self) -> BackendTag {
        match self {
            StoredBackend::ApkExact => BackendTag::ApkExact,
            StoredBackend::ApkHash { .. } => BackendTag::ApkHash,
            StoredBackend::Bhz => BackendTag::Bhz,
            StoredBackend::Glh { .. } => BackendTag::Glh,
        }
    }
}

/// In-memory mirror of one index file.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredIndex {
    pub dim: u32,
    pub m: u32,
    pub n_sub: u32,
    /// Bases in id order; subspace `i` (1-based) occupies
    /// `[(i-1)*D*m, i*D*m)`, column-major.
    pub bases: Vec<f64>,
    pub backend: StoredBackend,
}

impl StoredIndex {
    /// Captures a database (plus backend payload) for serialization.
    pub fn from_db(db: &SubspaceDB, backend: StoredBackend) -> StoredIndex {
        let mut bases = Vec::with_capacity(db.len() * db.ambient_dim() * db.subspace_dim());
        for s in db.iter() {
            bases.extend_from_slice(s.basis().data());
        }
        StoredIndex {
            dim: db.ambient_dim() as u32,
            m: db.subspace_dim() as u32,
            n_sub: db.len() as u32,
            bases,
            backend,
        }
    }

    fn sections(&self) -> Vec<Vec<u8>> {
        let mut sections = vec![f64s_to_bytes(&self.bases)];
        match &self.backend {
            StoredBackend::ApkExact | StoredBackend::Bhz => {}
            StoredBackend::ApkHash { params, hyperplanes, buckets } => {
                sections.push(params.to_bytes());
                sections.push(f64s_to_bytes(hyperplanes));
                sections.push(buckets.clone());
            }
            StoredBackend::Glh { tables, vectors_per_table, seed, vectors } => {
                let mut p = Vec::with_capacity(16);
                p.extend_from_slice(&tables.to_le_bytes());
                p.extend_from_slice(&vectors_per_table.to_le_bytes());
                p.extend_from_slice(&seed.to_le_bytes());
                sections.push(p);
                sections.push(f64s_to_bytes(vectors));
            }
        }
        sections
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let sections = self.sections();
        let payload: usize = sections.iter().map(|s| s.len() + 8).sum();
        let mut out = Vec::with_capacity(8 + 20 + payload);
        out.extend_from_slice(&MAGIC);
        for field in
            [self.dim, self.m, self.n_sub, self.backend.tag() as u32, sections.len() as u32]
        {
            out.extend_from_slice(&field.to_le_bytes());
        }
        for s in sections {
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            out.extend_from_slice(&s);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<StoredIndex, IndexFileError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return format_err("bad magic (not an index file)");
        }
        let dim = cur.u32()?;
        let m = cur.u32()?;
        let n_sub = cur.u32()?;
        let tag_raw = cur.u32()?;
        let n_sections = cur.u32()?;
        let tag = BackendTag::from_u32(tag_raw)
            .ok_or_else(|| IndexFileError::Format(format!("unknown backend tag {tag_raw}")))?;
        if n_sections != tag.section_count() {
            return format_err(format!(
                "backend tag {tag_raw} requires {} sections, header declares {n_sections}",
                tag.section_count()
            ));
        }
        if m == 0 || n_sub == 0 || dim < m {
            return format_err(format!("impossible shape: D={dim}, m={m}, N_sub={n_sub}"));
        }

        let bases_bytes = cur.section()?;
        let expected = n_sub as usize * dim as usize * m as usize * 8;
        if bases_bytes.len() != expected {
            return format_err(format!(
                "basis section holds {} bytes, shape needs {expected}",
                bases_bytes.len()
            ));
        }
        let bases = bytes_to_f64s(bases_bytes)?;

        let backend = match tag {
            BackendTag::ApkExact => StoredBackend::ApkExact,
            BackendTag::Bhz => StoredBackend::Bhz,
            BackendTag::ApkHash => {
                let params = HashIndexParams::from_bytes(cur.section()?)
                    .map_err(|e| IndexFileError::Format(e.to_string()))?;
                let hyperplanes = bytes_to_f64s(cur.section()?)?;
                let needed = params.tables * params.bits_per_table * dim as usize;
                if hyperplanes.len() != needed {
                    return format_err(format!(
                        "expected {needed} hyperplane coefficients, got {}",
                        hyperplanes.len()
                    ));
                }
                let buckets = cur.section()?.to_vec();
                StoredBackend::ApkHash { params, hyperplanes, buckets }
            }
            BackendTag::Glh => {
                let p = cur.section()?;
                if p.len() != 16 {
                    return format_err(format!(
                        "table-parameter section holds {} bytes, expected 16",
                        p.len()
                    ));
                }
                let tables = u32::from_le_bytes(p[0..4].try_into().unwrap());
                let vectors_per_table = u32::from_le_bytes(p[4..8].try_into().unwrap());
                let seed = u64::from_le_bytes(p[8..16].try_into().unwrap());
                if tables == 0 || vectors_per_table == 0 || vectors_per_table > 63 {
                    return format_err(format!(
                        "impossible table shape: {tables} tables of {vectors_per_table} vectors"
                    ));
                }
                let vectors = bytes_to_f64s(cur.section()?)?;
                let needed = tables as usize * vectors_per_table as usize * dim as usize;
                if vectors.len() != needed {
                    return format_err(format!(
                        "expected {needed} random-vector coefficients, got {}",
                        vectors.len()
                    ));
                }
                StoredBackend::Glh { tables, vectors_per_table, seed, vectors }
            }
        };

        if cur.pos != bytes.len() {
            return format_err(format!(
                "{} trailing bytes after the last declared section",
                bytes.len() - cur.pos
            ));
        }
        Ok(StoredIndex { dim, m, n_sub, bases, backend })
    }
}

pub fn write_index<P: AsRef<Path>>(index: &StoredIndex, path: P) -> Result<(), IndexFileError> {
    let path = path.as_ref();
    fs::write(path, index.to_bytes())
        .map_err(|source| IndexFileError::Io { path: path.display().to_string(), source })
}

pub fn read_index<P: AsRef<Path>>(path: P) -> Result<StoredIndex, IndexFileError> {
    let path = path.as_ref();
    let bytes = fs::read(path)
        .map_err(|source| IndexFileError::Io { path: path.display().to_string(), source })?;
    StoredIndex::from_bytes(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexFileError> {
        if self.bytes.len() - self.pos < n {
            return format_err(format!(
                "truncated: wanted {n} bytes at offset {}, {} remain",
                self.pos,
                self.bytes.len() - self.pos
            ));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, IndexFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn section(&mut self) -> Result<&'a [u8], IndexFileError> {
        let len = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        let len = usize::try_from(len)
            .map_err(|_| IndexFileError::Format(format!("section length {len} overflows")))?;
        self.take(len)
    }
}

fn f64s_to_bytes(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn bytes_to_f64s(bytes: &[u8]) -> Result<Vec<f64>, IndexFileError> {
    if bytes.len() % 8 != 0 {
        return format_err(format!("float section length {} is not a multiple of 8", bytes.len()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
