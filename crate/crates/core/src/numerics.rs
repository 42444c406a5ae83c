//! Small dense linear algebra: row-major matrices, stacked block vectors
//! living in `H^k` with `H = R^d`, Kronecker-style block application, LU
//! solves and the symmetric spectral/rank queries used by the validator.
//!
//! Spectral and singular value computations are delegated to `nalgebra` in
//! double precision; everything else is generic over [`Scalar`].

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Default relative tolerance for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative asymmetry tolerated by the symmetric routines.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.to_f64_lossy().is_finite()) {
            return Err(Error::Contract(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. An empty outer slice gives a 0x0
    /// matrix; ragged rows are a shape error.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|x| alpha * x)
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x)
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{what}: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "matrix sum")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "matrix difference")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "matrix product {:?} * {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx] + a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `self^T * self`, accumulated in index order.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                if row[i].is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + row[i] * row[j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "matrix-vector product {:?} * {}",
                self.shape(),
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    /// Sum of each row.
    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, &x| acc + x))
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|x| x.abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Exact check for zero diagonal and zero strict upper triangle.
    pub fn is_strictly_lower_triangular(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    /// `(A + A^T) / 2`; exactly symmetric for any input.
    pub fn symmetric_part(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "symmetric part of non-square {:?}",
                self.shape()
            )));
        }
        let two = T::one() + T::one();
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i)) / two
        }))
    }

    pub fn is_symmetric_exact(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|x| U::from_f64(x.to_f64_lossy()).expect("representable"))
                .collect(),
        }
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = 1.0f64.max(self.max_abs().to_f64_lossy());
        (0..self.rows).all(|i| {
            (0..i)
                .all(|j| (self.get(i, j) - self.get(j, i)).to_f64_lossy().abs() <= rel_tol * scale)
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x.to_f64_lossy()),
        )
    }

    fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| T::from_f64_lossy(m[(i, j)]))
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} ", self.rows, self.cols)?;
        f.debug_list()
            .entries(self.data.chunks(self.cols.max(1)).take(self.rows))
            .finish()
    }
}

/// A point of `H^blocks` with `H = R^dim`, stored block after block.
#[derive(Clone, PartialEq)]
pub struct BlockVector<T> {
    blocks: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> BlockVector<T> {
    pub fn zeros(blocks: usize, dim: usize) -> Self {
        Self {
            blocks,
            dim,
            data: vec![T::zero(); blocks * dim],
        }
    }

    pub fn from_flat(blocks: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != blocks * dim {
            return Err(Error::Shape(format!(
                "{} values for {blocks} blocks of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { blocks, dim, data })
    }

    /// Stacks blocks of equal length; `dim` must be given when empty.
    pub fn from_blocks<B: AsRef<[T]>>(blocks: &[B]) -> Result<Self> {
        let dim = blocks.first().map_or(0, |b| b.as_ref().len());
        let mut data = Vec::with_capacity(blocks.len() * dim);
        for (i, b) in blocks.iter().enumerate() {
            let b = b.as_ref();
            if b.len() != dim {
                return Err(Error::Shape(format!(
                    "block {i} has dimension {}, expected {dim}",
                    b.len()
                )));
            }
            data.extend_from_slice(b);
        }
        Ok(Self {
            blocks: blocks.len(),
            dim,
            data,
        })
    }

    /// `blocks` copies of the same point.
    pub fn repeated(point: &[T], blocks: usize) -> Self {
        let mut data = Vec::with_capacity(point.len() * blocks);
        for _ in 0..blocks {
            data.extend_from_slice(point);
        }
        Self {
            blocks,
            dim: point.len(),
            data,
        }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn block(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn block_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_blocks(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.blocks).map(move |i| self.block(i))
    }

    pub fn to_blocks(&self) -> Vec<Vec<T>> {
        self.iter_blocks().map(<[T]>::to_vec).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.blocks == other.blocks && self.dim == other.dim
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::Shape(format!(
                "block vectors {}x{} vs {}x{}",
                self.blocks, self.dim, other.blocks, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: T, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a + alpha * b))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            blocks: self.blocks,
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        Self {
            blocks: self.blocks,
            dim: self.dim,
            data: self.data.iter().map(|&x| alpha * x).collect(),
        }
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm_sq(&self) -> T {
        dot(&self.data, &self.data)
    }

    /// Blockwise sum `sum_i u_i`.
    pub fn block_sum(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.dim];
        for b in self.iter_blocks() {
            for (a, &x) in acc.iter_mut().zip(b) {
                *a = *a + x;
            }
        }
        acc
    }

    /// Blockwise mean `(1/k) sum_i u_i`.
    pub fn block_mean(&self) -> Vec<T> {
        let k = T::from_count(self.blocks.max(1));
        self.block_sum().into_iter().map(|x| x / k).collect()
    }
}

impl<T: Real> BlockVector<T> {
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }
}

impl<T: fmt::Debug> fmt::Debug for BlockVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.data.chunks(self.dim.max(1)).take(self.blocks))
            .finish()
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// Applies `W ⊗ Id` to a stacked vector: output block `i` is
/// `sum_j W[i][j] * u_j`.
pub fn kron_apply<T: Scalar>(w: &DenseMatrix<T>, u: &BlockVector<T>) -> Result<BlockVector<T>> {
    if u.blocks() != w.cols() {
        return Err(Error::Shape(format!(
            "cannot apply {}x{} block matrix to {} blocks",
            w.rows(),
            w.cols(),
            u.blocks()
        )));
    }
    let mut out = BlockVector::zeros(w.rows(), u.dim());
    kron_apply_into(w, u, &mut out);
    Ok(out)
}

/// Unchecked variant of [`kron_apply`] writing into a preallocated output.
pub(crate) fn kron_apply_into<T: Scalar>(
    w: &DenseMatrix<T>,
    u: &BlockVector<T>,
    out: &mut BlockVector<T>,
) {
    debug_assert_eq!(w.cols(), u.blocks());
    debug_assert_eq!(out.blocks(), w.rows());
    for i in 0..w.rows() {
        let dst = out.block_mut(i);
        dst.iter_mut().for_each(|x| *x = T::zero());
        for (j, &wij) in w.row(i).iter().enumerate() {
            if wij.is_zero() {
                continue;
            }
            for (d, &s) in dst.iter_mut().zip(u.block(j)) {
                *d = *d + wij * s;
            }
        }
    }
}

fn require_symmetric<T: Real>(q: &DenseMatrix<T>) -> Result<()> {
    if !q.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {:?}",
            q.shape()
        )));
    }
    if !q.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::Contract("matrix is not symmetric".into()));
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Real>(q: &DenseMatrix<T>) -> Result<Vec<T>> {
    require_symmetric(q)?;
    if q.rows() == 0 {
        return Ok(Vec::new());
    }
    let sym = q.symmetric_part()?.to_nalgebra();
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig.into_iter().map(T::from_f64_lossy).collect())
}

/// Largest eigenvalue of a symmetric matrix. A 0x0 matrix yields 0.
pub fn max_eigenvalue_symmetric<T: Real>(q: &DenseMatrix<T>) -> Result<T> {
    Ok(symmetric_eigenvalues(q)?
        .last()
        .copied()
        .unwrap_or_else(T::zero))
}

pub fn min_eigenvalue_symmetric<T: Real>(q: &DenseMatrix<T>) -> Result<T> {
    Ok(symmetric_eigenvalues(q)?
        .first()
        .copied()
        .unwrap_or_else(T::zero))
}

/// Singular values, descending.
pub fn singular_values<T: Real>(w: &DenseMatrix<T>) -> Vec<T> {
    if w.rows() == 0 || w.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = w.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.into_iter().map(T::from_f64_lossy).collect()
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank<T: Real>(w: &DenseMatrix<T>, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Contract(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    let sv = singular_values(w);
    let Some(&largest) = sv.first() else {
        return Ok(0);
    };
    let largest = largest.to_f64_lossy();
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv
        .iter()
        .filter(|s| s.to_f64_lossy() > tol * largest)
        .count())
}

/// Moore-Penrose pseudo-inverse, dropping singular values at or below
/// `tol` times the largest.
pub fn pseudo_inverse<T: Real>(w: &DenseMatrix<T>, tol: f64) -> Result<DenseMatrix<T>> {
    if w.rows() == 0 || w.cols() == 0 {
        return Ok(DenseMatrix::zeros(w.cols(), w.rows()));
    }
    let a = w.to_nalgebra();
    let svd = a.svd(true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = tol * largest;
    let pinv = svd
        .pseudo_inverse(eps.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Contract(e.to_string()))?;
    Ok(DenseMatrix::from_nalgebra(&pinv))
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Fails when a pivot falls below `1e-14 * max|A|`.
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!("LU of non-square {:?}", a.shape())));
        }
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        let tiny = T::from_f64_lossy(1e-14) * scale;
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -T::one()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot <= tiny {
                return Err(Error::Contract(format!(
                    "matrix is singular (pivot {pivot} in column {k})"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    lu[i * n + j] = lu[i * n + j] - f * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Shape(format!("LU solve: rhs {} vs {n}", b.len())));
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }
}

pub fn solve<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    Lu::factor(a)?.solve(b)
}
