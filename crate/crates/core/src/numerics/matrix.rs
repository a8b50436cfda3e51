use std::ops::{Index, IndexMut};

use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Rows of the left factor handled together in a product; each row still
/// accumulates over the inner index in ascending order.
const ROW_BLOCK: usize = 8;

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds `m[(i, j)] = f(i, j)`, filling rows in parallel.
    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut data = vec![0.0; rows * cols];
        if cols > 0 {
            data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = f(i, j);
                }
            });
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged rows");
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.weighted_product(None, other)
    }

    /// `out[(i, j)] = Σ_m self[(i, m)] · w[m] · other[(m, j)]`.
    ///
    /// Rows are computed in parallel; every entry sums over `m` in ascending
    /// order, so the result does not depend on the thread count.
    pub fn weighted_product(&self, weights: Option<&[f64]>, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return invalid(format!(
                "shape mismatch in product: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        if let Some(w) = weights {
            if w.len() != self.cols {
                return invalid("weight vector length does not match inner dimension");
            }
        }
        let (n, inner) = (other.cols, self.cols);
        let mut out = Self::zeros(self.rows, n);
        if n == 0 || self.rows == 0 {
            return Ok(out);
        }
        out.data
            .par_chunks_mut(ROW_BLOCK * n)
            .enumerate()
            .for_each(|(block, chunk)| {
                let first = block * ROW_BLOCK;
                let nrows = chunk.len() / n;
                let mut coef = [0.0; ROW_BLOCK];
                for m in 0..inner {
                    let wm = weights.map_or(1.0, |w| w[m]);
                    for (r, c) in coef.iter_mut().enumerate().take(nrows) {
                        *c = self.data[(first + r) * inner + m] * wm;
                    }
                    let brow = other.row(m);
                    for (r, out_row) in chunk.chunks_mut(n).enumerate() {
                        let a = coef[r];
                        if a != 0.0 {
                            for (o, &b) in out_row.iter_mut().zip(brow) {
                                *o += a * b;
                            }
                        }
                    }
                }
            });
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows)
            .into_par_iter()
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "matvec_transpose length mismatch");
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                    *yj += a * xi;
                }
            }
        }
        y
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `diag(d) · self`
    pub fn scale_rows(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.rows);
        for (i, &di) in d.iter().enumerate() {
            self.row_mut(i).iter_mut().for_each(|v| *v *= di);
        }
    }

    /// `self · diag(d)`
    pub fn scale_cols(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.cols);
        for i in 0..self.rows {
            self.row_mut(i).iter_mut().zip(d).for_each(|(v, &dj)| *v *= dj);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|m_ij - m_ji|`; infinite for non-square input.
    pub fn symmetry_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Averages with the transpose.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
