//! Minimal row-major matrix used by the network engine.
//!
//! The shapes here are small (widths up to ~100, batches up to a few
//! hundred), so a flat `Vec<f64>` with explicit loops is both the simplest
//! and the fastest option; the inner dot products run over contiguous rows
//! of both operands.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: n, cols, data }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "flat data length mismatch");
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `self (n×k) · otherᵀ (k×m from m×k)` — other stored row-major as m×k.
    /// This is the layer forward step with weights stored as (out, in).
    pub fn mul_transpose(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let dst = out.row_mut(i);
            for (o, cell) in dst.iter_mut().enumerate() {
                let rhs = &other.data[o * other.cols..(o + 1) * other.cols];
                let mut acc = 0.0;
                for k in 0..lhs.len() {
                    acc += lhs[k] * rhs[k];
                }
                *cell = acc;
            }
        }
        out
    }

    /// Plain `self (n×k) · other (k×m)`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let dst_range = i * out.cols..(i + 1) * out.cols;
            for (k, &l) in lhs.iter().enumerate() {
                let rhs = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[dst_range.clone()];
                for (d, &r) in dst.iter_mut().zip(rhs) {
                    *d += l * r;
                }
            }
        }
        out
    }

    /// `selfᵀ (k×n from n×k) · other (n×m)` — the weight-gradient step
    /// `deltaᵀ · activations` without materializing the transpose.
    pub fn transpose_mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "outer dimension mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let rhs = other.row(i);
            for (k, &l) in lhs.iter().enumerate() {
                let dst = &mut out.data[k * other.cols..(k + 1) * other.cols];
                for (d, &r) in dst.iter_mut().zip(rhs) {
                    *d += l * r;
                }
            }
        }
        out
    }

    /// Sum of each column (used for bias gradients).
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// Adds a row vector to every row.
    pub fn add_row_vector(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.cols, "row vector length mismatch");
        for i in 0..self.rows {
            for (cell, &b) in self.row_mut(i).iter_mut().zip(v) {
                *cell += b;
            }
        }
    }

    /// Element-wise product with another matrix of the same shape.
    pub fn hadamard_assign(&mut self, other: &Matrix) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}
