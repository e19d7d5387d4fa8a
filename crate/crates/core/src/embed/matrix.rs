use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

/// Dense row-major matrix of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// SHA-256 of the values rounded to `f32`, little-endian, row-major: the
    /// precision models are stored at, so a matrix and its reloaded file agree.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.rows as u64).to_le_bytes());
        hasher.update((self.cols as u64).to_le_bytes());
        for v in &self.data {
            hasher.update((*v as f32).to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// SHA-256 of the exact 64-bit values.
    pub fn exact_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for v in &self.data {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Matrix whose cells can be read and written through `&self` from several
/// threads. Relaxed loads and stores: concurrent updates to one row may be
/// lost, which is the usual lock-free SGD trade-off.
pub(crate) struct SharedMatrix {
    cols: usize,
    cells: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub(crate) fn from_matrix(m: &Matrix) -> SharedMatrix {
        SharedMatrix {
            cols: m.cols,
            cells: m.data.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    pub(crate) fn read_row(&self, row: usize, out: &mut [f64]) {
        let cells = &self.cells[row * self.cols..(row + 1) * self.cols];
        for (o, cell) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * delta`
    pub(crate) fn add_scaled(&self, row: usize, delta: &[f64], scale: f64) {
        let cells = &self.cells[row * self.cols..(row + 1) * self.cols];
        for (cell, d) in cells.iter().zip(delta) {
            let v = f64::from_bits(cell.load(Ordering::Relaxed)) + scale * d;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub(crate) fn into_matrix(self) -> Matrix {
        let rows = self.cells.len() / self.cols.max(1);
        let data = self.cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect();
        Matrix { rows, cols: self.cols, data }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
