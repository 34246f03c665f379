//! Design matrices, responses and the inner-product primitives every solver
//! and screening rule is built on.
//!
//! Dense storage is column-major. Sparse storage is compressed-column with
//! sorted row indices; centering and scaling of a sparse matrix are kept
//! implicit (a per-column shift and scale applied on the fly) so the stored
//! pattern stays sparse.

use crate::coef::Coefficients;
use crate::error::{Error, Result};

/// Untransformed predictor data as read from disk or produced by a simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum RawMatrix {
    Dense {
        n_rows: usize,
        n_cols: usize,
        /// Column-major values.
        data: Vec<f64>,
    },
    Sparse {
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

impl RawMatrix {
    pub fn dense(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                found: data.len(),
            });
        }
        Ok(RawMatrix::Dense {
            n_rows,
            n_cols,
            data,
        })
    }

    /// Builds a dense matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; n_rows * n_cols];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * n_rows + i] = v;
            }
        }
        Ok(RawMatrix::Dense {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n_cols = columns.len();
        let n_rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for col in columns {
            if col.len() != n_rows {
                return Err(Error::DimensionMismatch {
                    expected: n_rows,
                    found: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Ok(RawMatrix::Dense {
            n_rows,
            n_cols,
            data,
        })
    }

    /// Builds a compressed-column matrix from `(row, col, value)` triplets.
    /// Explicit zeros are dropped; duplicate positions are rejected.
    pub fn sparse_from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        triplets.retain(|t| t.2 != 0.0);
        triplets.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &triplets {
            if i >= n_rows {
                return Err(Error::DimensionMismatch {
                    expected: n_rows,
                    found: i + 1,
                });
            }
            if j >= n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: j + 1,
                });
            }
            if last == Some((i, j)) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate entry at row {i}, column {j}"
                )));
            }
            last = Some((i, j));
            col_ptr[j + 1] += 1;
            row_idx.push(i);
            values.push(v);
        }
        for j in 0..n_cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(RawMatrix::Sparse {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        match self {
            RawMatrix::Dense { n_rows, .. } | RawMatrix::Sparse { n_rows, .. } => *n_rows,
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            RawMatrix::Dense { n_cols, .. } | RawMatrix::Sparse { n_cols, .. } => *n_cols,
        }
    }

    /// Densifies a sparse matrix (no-op copy for dense input).
    pub fn to_dense(&self) -> RawMatrix {
        match self {
            RawMatrix::Dense { .. } => self.clone(),
            RawMatrix::Sparse {
                n_rows,
                n_cols,
                col_ptr,
                row_idx,
                values,
            } => {
                let mut data = vec![0.0; n_rows * n_cols];
                for j in 0..*n_cols {
                    for k in col_ptr[j]..col_ptr[j + 1] {
                        data[j * n_rows + row_idx[k]] = values[k];
                    }
                }
                RawMatrix::Dense {
                    n_rows: *n_rows,
                    n_cols: *n_cols,
                    data,
                }
            }
        }
    }

    /// Converts to compressed-column storage, dropping exact zeros.
    pub fn to_sparse(&self) -> RawMatrix {
        match self {
            RawMatrix::Sparse { .. } => self.clone(),
            RawMatrix::Dense {
                n_rows,
                n_cols,
                data,
            } => {
                let mut triplets = Vec::new();
                for j in 0..*n_cols {
                    for i in 0..*n_rows {
                        let v = data[j * n_rows + i];
                        if v != 0.0 {
                            triplets.push((i, j, v));
                        }
                    }
                }
                RawMatrix::sparse_from_triplets(*n_rows, *n_cols, triplets)
                    .expect("dense matrix converts to valid triplets")
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
        /// Effective column j is `(raw_j - shift[j]) / scale[j]`.
        shift: Vec<f64>,
        scale: Vec<f64>,
        has_shift: bool,
    },
}

/// Predictor matrix with cached column norms.
///
/// Immutable after construction; all methods take `&self`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    n_rows: usize,
    n_cols: usize,
    storage: Storage,
    col_norms: Vec<f64>,
    centered: bool,
    standardized: bool,
}

impl DesignMatrix {
    /// Wraps raw data without any transformation.
    pub fn from_raw(raw: RawMatrix) -> Self {
        match raw {
            RawMatrix::Dense {
                n_rows,
                n_cols,
                data,
            } => Self::from_dense_parts(n_rows, n_cols, data, false, false),
            RawMatrix::Sparse {
                n_rows,
                n_cols,
                col_ptr,
                row_idx,
                values,
            } => Self::from_sparse_parts(
                n_rows,
                n_cols,
                col_ptr,
                row_idx,
                values,
                vec![0.0; n_cols],
                vec![1.0; n_cols],
                false,
                false,
            ),
        }
    }

    /// Dense column-major matrix, untransformed.
    pub fn dense(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Self::from_raw(RawMatrix::dense(n_rows, n_cols, data)?))
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_raw(RawMatrix::from_columns(columns)?))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_raw(RawMatrix::from_rows(rows)?))
    }

    fn from_dense_parts(
        n_rows: usize,
        n_cols: usize,
        data: Vec<f64>,
        centered: bool,
        standardized: bool,
    ) -> Self {
        let col_norms = (0..n_cols)
            .map(|j| {
                data[j * n_rows..(j + 1) * n_rows]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        DesignMatrix {
            n_rows,
            n_cols,
            storage: Storage::Dense(data),
            col_norms,
            centered,
            standardized,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn from_sparse_parts(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
        shift: Vec<f64>,
        scale: Vec<f64>,
        centered: bool,
        standardized: bool,
    ) -> Self {
        let has_shift = shift.iter().any(|&m| m != 0.0);
        let col_norms = (0..n_cols)
            .map(|j| {
                let m = shift[j];
                let range = col_ptr[j]..col_ptr[j + 1];
                let nnz = range.len();
                let ss: f64 = values[range].iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                    + (n_rows - nnz) as f64 * m * m;
                ss.sqrt() / scale[j]
            })
            .collect();
        DesignMatrix {
            n_rows,
            n_cols,
            storage: Storage::Sparse {
                col_ptr,
                row_idx,
                values,
                shift,
                scale,
                has_shift,
            },
            col_norms,
            centered,
            standardized,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    pub fn col_norm(&self, j: usize) -> f64 {
        self.col_norms[j]
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// `x_j^T v`. Sums `v` internally when the column carries an implicit shift.
    #[inline]
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        match &self.storage {
            Storage::Dense(data) => dot(&data[j * self.n_rows..(j + 1) * self.n_rows], v),
            Storage::Sparse { has_shift, .. } => {
                let v_sum = if *has_shift { v.iter().sum() } else { 0.0 };
                self.col_dot_with_sum(j, v, v_sum)
            }
        }
    }

    /// `x_j^T v` given a precomputed `sum(v)` (only consulted for shifted sparse columns).
    #[inline]
    pub fn col_dot_with_sum(&self, j: usize, v: &[f64], v_sum: f64) -> f64 {
        match &self.storage {
            Storage::Dense(data) => dot(&data[j * self.n_rows..(j + 1) * self.n_rows], v),
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
                shift,
                scale,
                ..
            } => {
                let mut acc = 0.0;
                for k in col_ptr[j]..col_ptr[j + 1] {
                    acc += values[k] * v[row_idx[k]];
                }
                (acc - shift[j] * v_sum) / scale[j]
            }
        }
    }

    /// `v += a * x_j`.
    #[inline]
    pub fn col_axpy(&self, j: usize, a: f64, v: &mut [f64]) {
        match &self.storage {
            Storage::Dense(data) => {
                let col = &data[j * self.n_rows..(j + 1) * self.n_rows];
                for (vi, &xi) in v.iter_mut().zip(col) {
                    *vi += a * xi;
                }
            }
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
                shift,
                scale,
                ..
            } => {
                let b = a / scale[j];
                for k in col_ptr[j]..col_ptr[j + 1] {
                    v[row_idx[k]] += b * values[k];
                }
                if shift[j] != 0.0 {
                    let c = b * shift[j];
                    for vi in v.iter_mut() {
                        *vi -= c;
                    }
                }
            }
        }
    }

    /// `sum_i w_i x_ij v_i`, given `wv_sum = sum_i w_i v_i`.
    #[inline]
    pub fn col_wdot(&self, j: usize, w: &[f64], v: &[f64], wv_sum: f64) -> f64 {
        match &self.storage {
            Storage::Dense(data) => {
                let col = &data[j * self.n_rows..(j + 1) * self.n_rows];
                col.iter()
                    .zip(w)
                    .zip(v)
                    .map(|((x, w), v)| x * w * v)
                    .sum()
            }
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
                shift,
                scale,
                ..
            } => {
                let mut acc = 0.0;
                for k in col_ptr[j]..col_ptr[j + 1] {
                    let i = row_idx[k];
                    acc += values[k] * w[i] * v[i];
                }
                (acc - shift[j] * wv_sum) / scale[j]
            }
        }
    }

    /// Returns `(sum_i w_i x_ij, sum_i w_i x_ij^2)` given `w_sum = sum_i w_i`.
    pub fn col_weighted_moments(&self, j: usize, w: &[f64], w_sum: f64) -> (f64, f64) {
        match &self.storage {
            Storage::Dense(data) => {
                let col = &data[j * self.n_rows..(j + 1) * self.n_rows];
                col.iter().zip(w).fold((0.0, 0.0), |(s1, s2), (x, w)| {
                    (s1 + w * x, s2 + w * x * x)
                })
            }
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
                shift,
                scale,
                ..
            } => {
                let m = shift[j];
                let s = scale[j];
                let (mut wx, mut wxx) = (0.0, 0.0);
                for k in col_ptr[j]..col_ptr[j + 1] {
                    let wi = w[row_idx[k]];
                    wx += wi * values[k];
                    wxx += wi * values[k] * values[k];
                }
                let first = (wx - m * w_sum) / s;
                let second = (wxx - 2.0 * m * wx + m * m * w_sum) / (s * s);
                (first, second.max(0.0))
            }
        }
    }

    /// Materializes column `j` with any implicit transform applied.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        self.col_axpy(j, 1.0, &mut out);
        out
    }

    /// Effective values in column-major order.
    pub fn to_dense_colmajor(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(data) => data.clone(),
            Storage::Sparse { .. } => (0..self.n_cols).flat_map(|j| self.column(j)).collect(),
        }
    }

    /// The effective matrix as raw data. Shifted sparse columns are densified.
    pub fn to_raw(&self) -> RawMatrix {
        match &self.storage {
            Storage::Dense(data) => RawMatrix::Dense {
                n_rows: self.n_rows,
                n_cols: self.n_cols,
                data: data.clone(),
            },
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
                scale,
                has_shift,
                ..
            } => {
                if *has_shift {
                    RawMatrix::Dense {
                        n_rows: self.n_rows,
                        n_cols: self.n_cols,
                        data: self.to_dense_colmajor(),
                    }
                } else {
                    let mut scaled = values.clone();
                    for j in 0..self.n_cols {
                        for v in &mut scaled[col_ptr[j]..col_ptr[j + 1]] {
                            *v /= scale[j];
                        }
                    }
                    RawMatrix::Sparse {
                        n_rows: self.n_rows,
                        n_cols: self.n_cols,
                        col_ptr: col_ptr.clone(),
                        row_idx: row_idx.clone(),
                        values: scaled,
                    }
                }
            }
        }
    }

    /// Dense copy of the effective matrix.
    pub fn to_dense(&self) -> DesignMatrix {
        Self::from_dense_parts(
            self.n_rows,
            self.n_cols,
            self.to_dense_colmajor(),
            self.centered,
            self.standardized,
        )
    }

    /// `X^T v` for all columns.
    pub fn inner_products(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_rows(v.len())?;
        let v_sum = v.iter().sum();
        Ok((0..self.n_cols)
            .map(|j| self.col_dot_with_sum(j, v, v_sum))
            .collect())
    }

    /// `X^T v` restricted to `cols`.
    pub fn inner_products_subset(&self, v: &[f64], cols: &[usize]) -> Vec<f64> {
        let v_sum = v.iter().sum();
        cols.iter()
            .map(|&j| self.col_dot_with_sum(j, v, v_sum))
            .collect()
    }

    /// `X beta`, touching only the nonzero coefficients.
    pub fn mul_coefs(&self, beta: &Coefficients) -> Result<Vec<f64>> {
        if beta.n_predictors() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: beta.n_predictors(),
            });
        }
        let mut out = vec![0.0; self.n_rows];
        for (j, b) in beta.iter() {
            self.col_axpy(j, b, &mut out);
        }
        Ok(out)
    }

    pub(crate) fn check_rows(&self, len: usize) -> Result<()> {
        if len != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                found: len,
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// Outcome vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    values: Vec<f64>,
    centered: bool,
    binary: bool,
}

impl ResponseVector {
    /// A Gaussian response, stored as given.
    pub fn gaussian(values: Vec<f64>) -> Self {
        ResponseVector {
            values,
            centered: false,
            binary: false,
        }
    }

    /// A Gaussian response centered to mean zero.
    pub fn centered(mut values: Vec<f64>) -> Self {
        let mean = mean(&values);
        for v in &mut values {
            *v -= mean;
        }
        ResponseVector {
            values,
            centered: true,
            binary: false,
        }
    }

    /// A 0/1 response for logistic regression.
    pub fn binary(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::NonBinaryResponse(v, i));
            }
        }
        Ok(ResponseVector {
            values,
            centered: false,
            binary: true,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// How predictors are transformed before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StandardizeMode {
    /// Leave data untouched.
    None,
    /// Subtract column means.
    CenterOnly,
    /// Subtract column means, then scale every column to unit Euclidean norm.
    #[default]
    CenterAndScale,
}

/// How the response is treated during standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    Gaussian { center: bool },
    Binary,
}

/// Parameters that map standardized coefficients back to the data scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub y_mean: f64,
}

impl Transform {
    pub fn identity(p: usize) -> Self {
        Transform {
            means: vec![0.0; p],
            scales: vec![1.0; p],
            y_mean: 0.0,
        }
    }

    /// Back-transforms coefficients fit on standardized data; the returned
    /// intercept absorbs the column and response means.
    pub fn to_original(&self, beta: &Coefficients) -> Coefficients {
        let mut out = Coefficients::zeros(beta.n_predictors());
        let mut intercept = self.y_mean + beta.intercept;
        for (j, b) in beta.iter() {
            let v = b / self.scales[j];
            intercept -= self.means[j] * v;
            out.set(j, v);
        }
        out.intercept = intercept;
        out
    }
}

/// Output of [`standardize`].
#[derive(Debug, Clone)]
pub struct Standardized {
    pub x: DesignMatrix,
    pub y: ResponseVector,
    pub transform: Transform,
}

/// Standardizes a Gaussian problem. The response is centered unless `mode` is `None`.
pub fn standardize(x: &RawMatrix, y: &[f64], mode: StandardizeMode) -> Result<Standardized> {
    let center = mode != StandardizeMode::None;
    standardize_with(x, y, mode, ResponseKind::Gaussian { center })
}

/// Standardizes predictors with explicit control over the response.
pub fn standardize_with(
    x: &RawMatrix,
    y: &[f64],
    mode: StandardizeMode,
    response: ResponseKind,
) -> Result<Standardized> {
    if y.len() != x.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            found: y.len(),
        });
    }
    let (y_vec, y_mean) = match response {
        ResponseKind::Gaussian { center: true } => {
            let m = mean(y);
            (ResponseVector::centered(y.to_vec()), m)
        }
        ResponseKind::Gaussian { center: false } => (ResponseVector::gaussian(y.to_vec()), 0.0),
        ResponseKind::Binary => (ResponseVector::binary(y.to_vec())?, 0.0),
    };
    let (design, transform) = standardize_matrix(x, mode)?;
    Ok(Standardized {
        x: design,
        y: y_vec,
        transform: Transform {
            y_mean,
            ..transform
        },
    })
}

fn standardize_matrix(x: &RawMatrix, mode: StandardizeMode) -> Result<(DesignMatrix, Transform)> {
    let p = x.n_cols();
    if mode == StandardizeMode::None {
        return Ok((DesignMatrix::from_raw(x.clone()), Transform::identity(p)));
    }
    let scale_cols = mode == StandardizeMode::CenterAndScale;
    match x {
        RawMatrix::Dense {
            n_rows,
            n_cols,
            data,
        } => {
            let n = *n_rows;
            let mut out = data.clone();
            let mut means = vec![0.0; p];
            let mut scales = vec![1.0; p];
            for j in 0..*n_cols {
                let col = &mut out[j * n..(j + 1) * n];
                if scale_cols && is_constant(col) {
                    return Err(Error::ConstantColumn(j));
                }
                let m = mean(col);
                for v in col.iter_mut() {
                    *v -= m;
                }
                means[j] = m;
                if scale_cols {
                    let norm = dot(col, col).sqrt();
                    for v in col.iter_mut() {
                        *v /= norm;
                    }
                    scales[j] = norm;
                }
            }
            let design = DesignMatrix::from_dense_parts(n, p, out, true, scale_cols);
            Ok((
                design,
                Transform {
                    means,
                    scales,
                    y_mean: 0.0,
                },
            ))
        }
        RawMatrix::Sparse {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        } => {
            let n = *n_rows;
            let mut means = vec![0.0; p];
            let mut scales = vec![1.0; p];
            for j in 0..*n_cols {
                let vals = &values[col_ptr[j]..col_ptr[j + 1]];
                let nnz = vals.len();
                if scale_cols && sparse_is_constant(vals, n) {
                    return Err(Error::ConstantColumn(j));
                }
                let m = vals.iter().sum::<f64>() / n as f64;
                means[j] = m;
                if scale_cols {
                    let ss: f64 = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                        + (n - nnz) as f64 * m * m;
                    scales[j] = ss.sqrt();
                }
            }
            let design = DesignMatrix::from_sparse_parts(
                n,
                p,
                col_ptr.clone(),
                row_idx.clone(),
                values.clone(),
                means.clone(),
                scales.clone(),
                true,
                scale_cols,
            );
            Ok((
                design,
                Transform {
                    means,
                    scales,
                    y_mean: 0.0,
                },
            ))
        }
    }
}

fn is_constant(col: &[f64]) -> bool {
    col.windows(2).all(|w| w[0] == w[1])
}

fn sparse_is_constant(vals: &[f64], n: usize) -> bool {
    if vals.len() < n {
        // implicit zeros present: constant only if every stored value is zero too
        vals.iter().all(|&v| v == 0.0)
    } else {
        is_constant(vals)
    }
}

/// `X^T v`.
pub fn inner_products(x: &DesignMatrix, v: &[f64]) -> Result<Vec<f64>> {
    x.inner_products(v)
}

/// Smallest penalty at which every coefficient is zero.
///
/// Gaussian: `max_j |x_j^T y|`. Binary responses use the null-model residual,
/// `max_j |x_j^T (y - ybar)|`.
pub fn lambda_max(x: &DesignMatrix, y: &ResponseVector) -> Result<f64> {
    x.check_rows(y.len())?;
    let c = if y.is_binary() {
        let ybar = y.mean();
        if ybar == 0.0 || ybar == 1.0 {
            return Err(Error::DegenerateResponse);
        }
        let centered: Vec<f64> = y.values().iter().map(|v| v - ybar).collect();
        x.inner_products(&centered)?
    } else {
        x.inner_products(y.values())?
    };
    Ok(c.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// `y - X beta`.
pub fn residual(x: &DesignMatrix, y: &ResponseVector, beta: &Coefficients) -> Result<Vec<f64>> {
    x.check_rows(y.len())?;
    let fitted = x.mul_coefs(beta)?;
    Ok(y.values()
        .iter()
        .zip(&fitted)
        .map(|(yi, fi)| yi - fi)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_dense(n: usize, p: usize, seed: u64, density: f64) -> RawMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * p)
            .map(|_| {
                if rng.random::<f64>() < density {
                    rng.random::<f64>() * 4.0 - 2.0
                } else {
                    0.0
                }
            })
            .collect();
        RawMatrix::dense(n, p, data).unwrap()
    }

    #[test]
    fn scale_mode_centers_and_normalizes() {
        let x = RawMatrix::from_columns(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let s = standardize(&x, &[0.0, 1.0, 2.0], StandardizeMode::CenterAndScale).unwrap();
        let col = s.x.column(0);
        let r = 2f64.sqrt();
        let expected = [-1.0 / r, 0.0, 1.0 / r];
        for (a, b) in col.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((s.x.col_norm(0) - 1.0).abs() < 1e-10);
        assert!(s.x.is_standardized() && s.x.is_centered());
    }

    #[test]
    fn constant_column_is_rejected() {
        let x = RawMatrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]]).unwrap();
        let err = standardize(&x, &[1.0, 2.0, 3.0], StandardizeMode::CenterAndScale).unwrap_err();
        assert!(matches!(err, Error::ConstantColumn(1)));
        let sparse = x.to_sparse();
        let err =
            standardize(&sparse, &[1.0, 2.0, 3.0], StandardizeMode::CenterAndScale).unwrap_err();
        assert!(matches!(err, Error::ConstantColumn(1)));
        // centering alone is fine
        assert!(standardize(&x, &[1.0, 2.0, 3.0], StandardizeMode::CenterOnly).is_ok());
    }

    #[test]
    fn mode_none_is_bitwise_identity() {
        let x = random_dense(6, 4, 3, 1.0);
        let y = vec![0.3, -1.2, 2.5, 0.1, 0.7, 1e-300];
        let s = standardize(&x, &y, StandardizeMode::None).unwrap();
        assert_eq!(s.x.to_raw(), x);
        assert_eq!(s.y.values(), &y[..]);
        assert!(!s.y.is_centered());
    }

    #[test]
    fn inner_products_identity_and_zero() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(x.inner_products(&[3.0, 1.0]).unwrap(), vec![3.0, 1.0]);
        assert_eq!(x.inner_products(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            x.inner_products(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn dense_and_sparse_inner_products_agree() {
        let raw = random_dense(5, 3, 11, 0.6);
        let dense = DesignMatrix::from_raw(raw.clone());
        let sparse = DesignMatrix::from_raw(raw.to_sparse());
        let v = [0.5, -1.0, 2.0, 0.25, 3.0];
        let a = dense.inner_products(&v).unwrap();
        let b = sparse.inner_products(&v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn implicit_centering_matches_dense() {
        let raw = random_dense(30, 8, 5, 0.3);
        let y: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        for mode in [StandardizeMode::CenterOnly, StandardizeMode::CenterAndScale] {
            let d = standardize(&raw, &y, mode).unwrap();
            let s = standardize(&raw.to_sparse(), &y, mode).unwrap();
            assert!(s.x.is_sparse());
            for j in 0..8 {
                assert!((d.x.col_norm(j) - s.x.col_norm(j)).abs() < 1e-12);
            }
            let a = d.x.inner_products(d.y.values()).unwrap();
            let b = s.x.inner_products(s.y.values()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
            let w: Vec<f64> = (0..30).map(|i| 0.1 + (i % 7) as f64 * 0.05).collect();
            let w_sum: f64 = w.iter().sum();
            let wy: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
            for j in 0..8 {
                let (m1, m2) = d.x.col_weighted_moments(j, &w, w_sum);
                let (s1, s2) = s.x.col_weighted_moments(j, &w, w_sum);
                assert!((m1 - s1).abs() < 1e-12 && (m2 - s2).abs() < 1e-12);
                let a = d.x.col_wdot(j, &w, &y, wy);
                let b = s.x.col_wdot(j, &w, &y, wy);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_max_gaussian_and_logistic() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let y = ResponseVector::gaussian(vec![3.0, 1.0]);
        assert_eq!(lambda_max(&x, &y).unwrap(), 3.0);

        let x = DesignMatrix::from_columns(&[vec![0.5, -0.5, 0.5, -0.5]]).unwrap();
        let y = ResponseVector::binary(vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(lambda_max(&x, &y).unwrap(), 1.0);

        let y = ResponseVector::binary(vec![1.0; 4]).unwrap();
        assert!(matches!(lambda_max(&x, &y), Err(Error::DegenerateResponse)));
    }

    #[test]
    fn residual_edge_cases() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let y = ResponseVector::gaussian(vec![3.0, 1.0]);
        let zero = Coefficients::zeros(2);
        assert_eq!(residual(&x, &y, &zero).unwrap(), vec![3.0, 1.0]);
        let beta = Coefficients::from_dense(&[3.0, 1.0]);
        assert_eq!(residual(&x, &y, &beta).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn residual_matches_dense_product() {
        let raw = random_dense(12, 6, 9, 0.5);
        let x = DesignMatrix::from_raw(raw.to_sparse());
        let y: Vec<f64> = (0..12).map(|i| i as f64 * 0.3 - 1.0).collect();
        let beta = Coefficients::from_dense(&[0.0, 1.5, 0.0, -0.25, 2.0, 0.0]);
        let r = residual(&x, &ResponseVector::gaussian(y.clone()), &beta).unwrap();
        let RawMatrix::Dense { data, .. } = raw else { unreachable!() };
        let dense_beta = beta.to_dense();
        for i in 0..12 {
            let fit: f64 = (0..6).map(|j| data[j * 12 + i] * dense_beta[j]).sum();
            assert!((r[i] - (y[i] - fit)).abs() < 1e-12);
        }
    }

    #[test]
    fn back_transform_recovers_raw_scale_fit() {
        let x = RawMatrix::from_columns(&[vec![1.0, 2.0, 4.0, 7.0], vec![0.0, 3.0, 1.0, 2.0]])
            .unwrap();
        let y = [1.0, 2.0, 0.5, 4.0];
        let s = standardize(&x, &y, StandardizeMode::CenterAndScale).unwrap();
        let beta = Coefficients::from_dense(&[0.7, -0.2]);
        let orig = s.transform.to_original(&beta);
        // predictions on the standardized scale plus ybar equal raw-scale predictions
        let fitted = s.x.mul_coefs(&beta).unwrap();
        let RawMatrix::Dense { data, .. } = &x else { unreachable!() };
        for i in 0..4 {
            let raw_pred = orig.intercept
                + orig.get(0) * data[i]
                + orig.get(1) * data[4 + i];
            assert!((raw_pred - (fitted[i] + s.transform.y_mean)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn standardization_is_idempotent(seed in 0u64..500, n in 3usize..20, p in 1usize..6) {
            let raw = random_dense(n, p, seed, 1.0);
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * 1.7).cos()).collect();
            let once = match standardize(&raw, &y, StandardizeMode::CenterAndScale) {
                Ok(s) => s,
                Err(_) => return Ok(()),
            };
            let twice = standardize(&once.x.to_raw(), once.y.values(), StandardizeMode::CenterAndScale).unwrap();
            let a = once.x.to_dense_colmajor();
            let b = twice.x.to_dense_colmajor();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-12);
            }
            for (u, v) in once.y.values().iter().zip(twice.y.values()) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }

        #[test]
        fn zero_residual_inner_products_equal_response_inner_products(seed in 0u64..500) {
            let raw = random_dense(10, 4, seed, 0.7);
            let x = DesignMatrix::from_raw(raw);
            let y = ResponseVector::gaussian((0..10).map(|i| i as f64 - 4.5).collect());
            let r = residual(&x, &y, &Coefficients::zeros(4)).unwrap();
            prop_assert_eq!(x.inner_products(&r).unwrap(), x.inner_products(y.values()).unwrap());
        }

        #[test]
        fn standardized_lambda_max_bounded_by_response_norm(seed in 0u64..500) {
            let raw = random_dense(15, 5, seed, 1.0);
            let y: Vec<f64> = (0..15).map(|i| ((i * 7 + seed as usize) % 11) as f64).collect();
            if let Ok(s) = standardize(&raw, &y, StandardizeMode::CenterAndScale) {
                for j in 0..5 {
                    prop_assert!((s.x.col_norm(j) - 1.0).abs() < 1e-10);
                }
                let lmax = lambda_max(&s.x, &s.y).unwrap();
                prop_assert!(lmax <= s.y.norm() * (1.0 + 1e-12));
                prop_assert!(s.y.mean().abs() < 1e-12);
            }
        }
    }
}
