//! Dense linear algebra for small problems.
//!
//! Everything here is sized for the shapes this crate actually meets:
//! bases with at most a few dozen columns and cross-Gram matrices of at
//! most a few dozen rows. The kernels are hand-written (modified
//! Gram-Schmidt, one-sided and two-sided Jacobi) so that results are
//! bit-reproducible across runs and platforms with the same rounding
//! behavior — there is no threading and no data-dependent reordering.

use thiserror::Error;

/// Numerical knobs shared by the routines in this module.
///
/// The defaults are deliberately conservative; all public entry points
/// have a `*_with` variant taking an explicit config for callers that
/// need a different trade-off (or want to provoke error paths).
#[derive(Debug, Clone, Copy)]
pub struct LinalgConfig {
    /// Maximum allowed `|R^T R - I|` entry for a matrix to count as
    /// already orthonormal (early-out in [`orthonormalize_with`], and
    /// the guaranteed bound on its output).
    pub ortho_tol: f64,
    /// A column whose residual after projection drops below this
    /// fraction of its original norm is considered linearly dependent.
    pub rank_tol: f64,
    /// Sweep budget for both Jacobi iterations before giving up.
    pub jacobi_max_sweeps: usize,
    /// Convergence threshold for Jacobi: off-diagonal Frobenius norm
    /// relative to the matrix scale.
    pub jacobi_tol: f64,
    /// An eigenvalue below this fraction of the largest one counts as
    /// zero when checking the requested rank in [`pca_basis_with`].
    pub eig_rank_tol: f64,
}

impl Default for LinalgConfig {
    fn default() -> Self {
        LinalgConfig {
            ortho_tol: 1e-10,
            rank_tol: 1e-10,
            jacobi_max_sweeps: 100,
            jacobi_tol: 1e-12,
            eig_rank_tol: 1e-12,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    /// A column (or eigenvalue) fell below the rank tolerance; `index`
    /// is the offending column/eigenvalue position, `magnitude` what
    /// was left of it.
    #[error("rank deficient at position {index} (residual magnitude {magnitude:.3e})")]
    RankDeficient { index: usize, magnitude: f64 },
    /// A Jacobi iteration exhausted its sweep budget.
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

// ─────────────────────────── Matrix ───────────────────────────

/// A dense column-major `f64` matrix.
///
/// Column-major layout keeps basis columns contiguous, which is what
/// every hot loop in this crate iterates over.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    /// Wraps existing column-major storage.
    ///
    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "storage does not match {rows}x{cols}");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix whose j-th column is `columns[j]`.
    ///
    /// # Panics
    /// If `columns` is empty or the columns have unequal lengths.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        assert!(!columns.is_empty(), "need at least one column");
        let rows = columns[0].len();
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend_from_slice(c);
        }
        Matrix { rows, cols: columns.len(), data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The underlying column-major storage.
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        t
    }

    /// Plain matrix product `self * rhs`.
    ///
    /// # Panics
    /// If the inner dimensions disagree.
    pub fn multiply(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions disagree");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let rcol = rhs.col(j);
            let ocol = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &w) in rcol.iter().enumerate() {
                if w != 0.0 {
                    let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                    for i in 0..self.rows {
                        ocol[i] += w * acol[i];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest entrywise absolute difference; matrices must have the
    /// same shape.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dot product with four independent accumulators.
///
/// The fixed summation order keeps results identical from run to run
/// while still letting the backend use SIMD lanes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4 * 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let mut i = 0;
    while i < chunks {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        i += 4;
    }
    let mut tail = 0.0;
    while i < n {
        tail += a[i] * b[i];
        i += 1;
    }
    (s0 + s1) + (s2 + s3) + tail
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Largest deviation of `m^T m` from the identity, i.e. the worst
/// column-pair inner product error. Zero for a perfectly orthonormal
/// matrix.
pub fn orthonormality_defect(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.cols() {
        for i in 0..=j {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(m.col(i), m.col(j)) - target).abs());
        }
    }
    worst
}

/// Flips the column's sign so its largest-magnitude entry is positive
/// (first such entry wins on exact ties). Applying this twice is a
/// no-op, which makes every routine using it idempotent down to the
/// bit level.
fn fix_column_sign(col: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        for v in col.iter_mut() {
            *v = -*v;
        }
    }
}

// ───────────────────── orthonormalization ─────────────────────

/// [`orthonormalize_with`] under the default [`LinalgConfig`].
pub fn orthonormalize(m: &Matrix) -> Result<Matrix, LinalgError> {
    orthonormalize_with(m, &LinalgConfig::default())
}

/// Returns an orthonormal basis with the same column span as `m`,
/// via modified Gram-Schmidt with a second projection pass.
///
/// The output satisfies `|R^T R - I| <= ortho_tol` entrywise and uses
/// a fixed sign convention per column (largest-magnitude entry
/// positive). An input that is already orthonormal within `ortho_tol`
/// is returned as-is apart from sign fixing, so the map is idempotent:
/// feeding the output back in reproduces it exactly.
pub fn orthonormalize_with(m: &Matrix, cfg: &LinalgConfig) -> Result<Matrix, LinalgError> {
    if m.cols() > m.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "cannot orthonormalize {} columns in dimension {}",
            m.cols(),
            m.rows()
        )));
    }
    if !m.is_finite() {
        return Err(LinalgError::InvalidInput("non-finite entry".into()));
    }

    let mut out = m.clone();
    if orthonormality_defect(m) > cfg.ortho_tol {
        for j in 0..out.cols() {
            let original = norm(out.col(j));
            if original == 0.0 {
                return Err(LinalgError::RankDeficient { index: j, magnitude: 0.0 });
            }
            // Two projection passes: the second mops up the rounding
            // left by the first and keeps the result orthogonal to
            // working precision even for ill-conditioned inputs.
            for _ in 0..2 {
                for i in 0..j {
                    let coef = dot(out.col(i), out.col(j));
                    let (head, tail) = out.data.split_at_mut(j * out.rows);
                    let prev = &head[i * out.rows..(i + 1) * out.rows];
                    let cur = &mut tail[..out.rows];
                    for (c, p) in cur.iter_mut().zip(prev) {
                        *c -= coef * p;
                    }
                }
            }
            let remaining = norm(out.col(j));
            if remaining < cfg.rank_tol * original {
                return Err(LinalgError::RankDeficient { index: j, magnitude: remaining });
            }
            let inv = 1.0 / remaining;
            for v in out.col_mut(j) {
                *v *= inv;
            }
        }
    }
    for j in 0..out.cols() {
        fix_column_sign(out.col_mut(j));
    }
    debug_assert!(orthonormality_defect(&out) <= cfg.ortho_tol);
    Ok(out)
}

// ─────────────────────── singular values ───────────────────────

/// Singular values in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// All values, largest first; the length equals the smaller matrix
    /// dimension.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// [`singular_values_with`] under the default [`LinalgConfig`].
pub fn singular_values(m: &Matrix) -> Result<SingularSpectrum, LinalgError> {
    singular_values_with(m, &LinalgConfig::default())
}

/// Computes all singular values of `m` by one-sided Jacobi rotations
/// (plane rotations applied to column pairs until all columns are
/// mutually orthogonal; the singular values are then the column norms).
///
/// Values come back sorted in nonincreasing order and are always
/// nonnegative.
pub fn singular_values_with(m: &Matrix, cfg: &LinalgConfig) -> Result<SingularSpectrum, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::InvalidInput("non-finite entry".into()));
    }
    // One-sided Jacobi orthogonalizes columns, so work on whichever
    // orientation has fewer of them.
    let mut work = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let n = work.cols();

    // The implicit Gram matrix G = W^T W has Frobenius scale ~ |W|_F^2;
    // convergence is judged on G's off-diagonal norm relative to that.
    let scale = dot(work.data(), work.data());
    if scale > 0.0 {
        let mut converged = false;
        'outer: for _sweep in 0..cfg.jacobi_max_sweeps {
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    let gamma = dot(work.col(p), work.col(q));
                    off_sq += gamma * gamma;
                }
            }
            if (2.0 * off_sq).sqrt() <= cfg.jacobi_tol * scale {
                converged = true;
                break 'outer;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha = dot(work.col(p), work.col(p));
                    let beta = dot(work.col(q), work.col(q));
                    let gamma = dot(work.col(p), work.col(q));
                    // Rotating when the columns are orthogonal to
                    // machine precision would only churn rounding.
                    if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let (head, tail) = work.data.split_at_mut(q * work.rows);
                    let pcol = &mut head[p * work.rows..(p + 1) * work.rows];
                    let qcol = &mut tail[..work.rows];
                    for (x, y) in pcol.iter_mut().zip(qcol.iter_mut()) {
                        let (xp, xq) = (*x, *y);
                        *x = c * xp - s * xq;
                        *y = s * xp + c * xq;
                    }
                }
            }
        }
        if !converged {
            // One final check: the last sweep may have finished the job.
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    let gamma = dot(work.col(p), work.col(q));
                    off_sq += gamma * gamma;
                }
            }
            if (2.0 * off_sq).sqrt() > cfg.jacobi_tol * scale {
                return Err(LinalgError::NoConvergence { sweeps: cfg.jacobi_max_sweeps });
            }
        }
    }

    let mut values: Vec<f64> = (0..n).map(|j| norm(work.col(j))).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(SingularSpectrum { values })
}

// ──────────────────── symmetric eigensolver ────────────────────

/// [`symmetric_eigen_with`] under the default [`LinalgConfig`].
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix), LinalgError> {
    symmetric_eigen_with(a, &LinalgConfig::default())
}

/// Full eigen-decomposition of a symmetric matrix by cyclic Jacobi
/// rotations. Returns `(eigenvalues, eigenvectors)` with eigenvalues
/// sorted in nonincreasing order and the i-th eigenvector in column i.
///
/// Ties keep the order in which the diagonal produced them (the sort
/// is stable), so results are deterministic. Eigenvector signs follow
/// from the rotation sequence and carry no particular convention.
pub fn symmetric_eigen_with(a: &Matrix, cfg: &LinalgConfig) -> Result<(Vec<f64>, Matrix), LinalgError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::InvalidInput("non-finite entry".into()));
    }
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            asym = asym.max((a.get(i, j) - a.get(j, i)).abs());
        }
    }
    let scale = a.frobenius_norm();
    if asym > 1e-8 * scale.max(1.0) {
        return Err(LinalgError::InvalidInput("matrix is not symmetric".into()));
    }

    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    if scale > 0.0 {
        let mut converged = false;
        for _sweep in 0..=cfg.jacobi_max_sweeps {
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    let e = w.get(p, q);
                    off_sq += 2.0 * e * e;
                }
            }
            if off_sq.sqrt() <= cfg.jacobi_tol * scale {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = w.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (w.get(q, q) - w.get(p, p)) / (2.0 * apq);
                    let t = if theta.is_finite() {
                        theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                    } else {
                        0.0
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;

                    let app = w.get(p, p);
                    let aqq = w.get(q, q);
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = w.get(i, p);
                        let aiq = w.get(i, q);
                        w.set(i, p, c * aip - s * aiq);
                        w.set(p, i, c * aip - s * aiq);
                        w.set(i, q, s * aip + c * aiq);
                        w.set(q, i, s * aip + c * aiq);
                    }
                    w.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
                    w.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
                    w.set(p, q, 0.0);
                    w.set(q, p, 0.0);

                    let (head, tail) = v.data.split_at_mut(q * n);
                    let vp = &mut head[p * n..(p + 1) * n];
                    let vq = &mut tail[..n];
                    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                        let (xp, xq) = (*x, *y);
                        *x = c * xp - s * xq;
                        *y = s * xp + c * xq;
                    }
                }
            }
        }
        if !converged {
            return Err(LinalgError::NoConvergence { sweeps: cfg.jacobi_max_sweeps });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.get(j, j).total_cmp(&w.get(i, i)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| w.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(v.col(src));
    }
    Ok((eigenvalues, vectors))
}

// ───────────────────────── cross-Gram ─────────────────────────

/// The matrix of pairwise column inner products `p^T q`
/// (shape `p.cols() x q.cols()`).
pub fn cross_gram(p: &Matrix, q: &Matrix) -> Result<Matrix, LinalgError> {
    if p.rows() != q.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "cross-Gram needs equal ambient dimensions, got {} vs {}",
            p.rows(),
            q.rows()
        )));
    }
    let mut out = Matrix::zeros(p.cols(), q.cols());
    for t in 0..q.cols() {
        for s in 0..p.cols() {
            out.set(s, t, dot(p.col(s), q.col(t)));
        }
    }
    Ok(out)
}

// ──────────────────────────── PCA ────────────────────────────

/// [`pca_basis_with`] without mean subtraction, under the default
/// [`LinalgConfig`].
pub fn pca_basis(samples: &[Vec<f64>], m: usize) -> Result<Matrix, LinalgError> {
    pca_basis_with(samples, m, false, &LinalgConfig::default())
}

/// Orthonormal basis of the `m` strongest directions of the sample
/// autocorrelation `(1/n) Σ x xᵀ` (optionally of the covariance, when
/// `subtract_mean` is set).
///
/// By default the samples are *not* centered: for data living near a
/// linear subspace through the origin the autocorrelation eigenvectors
/// are exactly the subspace directions, and centering would destroy
/// that. When `n < D` the decomposition runs on the `n x n` Gram
/// matrix instead of the `D x D` autocorrelation — same subspace,
/// much smaller eigenproblem.
///
/// Columns are ordered by descending eigenvalue and carry the sign
/// convention of [`orthonormalize_with`].
pub fn pca_basis_with(
    samples: &[Vec<f64>],
    m: usize,
    subtract_mean: bool,
    cfg: &LinalgConfig,
) -> Result<Matrix, LinalgError> {
    let n = samples.len();
    if n == 0 || m == 0 {
        return Err(LinalgError::InvalidInput("need at least one sample and m >= 1".into()));
    }
    let d = samples[0].len();
    if samples.iter().any(|s| s.len() != d) {
        return Err(LinalgError::DimensionMismatch("samples have unequal lengths".into()));
    }
    if m > d {
        return Err(LinalgError::DimensionMismatch(format!(
            "cannot extract {m} directions from dimension {d}"
        )));
    }
    if n < m {
        return Err(LinalgError::InvalidInput(format!(
            "need at least {m} samples for an {m}-dimensional basis, got {n}"
        )));
    }
    if samples.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(LinalgError::InvalidInput("non-finite sample entry".into()));
    }

    let centered: Vec<Vec<f64>>;
    let xs: &[Vec<f64>] = if subtract_mean {
        let mut mean = vec![0.0; d];
        for s in samples {
            for (m_i, v) in mean.iter_mut().zip(s) {
                *m_i += v;
            }
        }
        for v in &mut mean {
            *v /= n as f64;
        }
        centered = samples
            .iter()
            .map(|s| s.iter().zip(&mean).map(|(v, mu)| v - mu).collect())
            .collect();
        &centered
    } else {
        samples
    };

    let inv_n = 1.0 / n as f64;
    let raw = if n >= d {
        // Direct route: eigenvectors of the D x D autocorrelation.
        let mut corr = Matrix::zeros(d, d);
        for s in xs {
            for j in 0..d {
                let w = s[j] * inv_n;
                if w != 0.0 {
                    let col = corr.col_mut(j);
                    for (ci, &si) in col.iter_mut().zip(s.iter()) {
                        *ci += w * si;
                    }
                }
            }
        }
        let (lambda, vecs) = symmetric_eigen_with(&corr, cfg)?;
        check_rank(&lambda, m, cfg)?;
        let mut basis = Matrix::zeros(d, m);
        for j in 0..m {
            basis.col_mut(j).copy_from_slice(vecs.col(j));
        }
        basis
    } else {
        // Few samples: the n x n Gram matrix has the same nonzero
        // spectrum, and each eigenvector lifts back as a sample
        // combination x_1..x_n weighted by its entries.
        let mut gram = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let g = dot(&xs[a], &xs[b]) * inv_n;
                gram.set(a, b, g);
                gram.set(b, a, g);
            }
        }
        let (lambda, vecs) = symmetric_eigen_with(&gram, cfg)?;
        check_rank(&lambda, m, cfg)?;
        let mut basis = Matrix::zeros(d, m);
        for j in 0..m {
            let weights = vecs.col(j);
            let col = basis.col_mut(j);
            for (a, &w) in weights.iter().enumerate() {
                if w != 0.0 {
                    for (ci, &si) in col.iter_mut().zip(xs[a].iter()) {
                        *ci += w * si;
                    }
                }
            }
            let inv = 1.0 / (n as f64 * lambda[j]).sqrt();
            for v in col {
                *v *= inv;
            }
        }
        basis
    };

    // Final polish: exact orthonormality plus the fixed sign
    // convention, so equal inputs give bitwise-equal bases.
    orthonormalize_with(&raw, cfg)
}

fn check_rank(lambda: &[f64], m: usize, cfg: &LinalgConfig) -> Result<(), LinalgError> {
    let top = lambda.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Err(LinalgError::RankDeficient { index: 0, magnitude: top });
    }
    for (j, &l) in lambda.iter().take(m).enumerate() {
        if l <= cfg.eig_rank_tol * top {
            return Err(LinalgError::RankDeficient { index: j, magnitude: l });
        }
    }
    Ok(())
}

// ─────────────────────────── tests ───────────────────────────
