//! Sparse symmetric matrices and envelope Cholesky.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn to_csr(mut self) -> Csr {
        self.entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::with_capacity(self.entries.len());
        let mut val: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut rows: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                if val.last() == Some(&0.0) {
                    val.pop();
                    col.pop();
                    rows.pop();
                }
                col.push(j);
                val.push(v);
                rows.push(i);
                last = Some((i, j));
            }
        }
        if val.last() == Some(&0.0) {
            val.pop();
            col.pop();
            rows.pop();
        }
        for i in rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n: self.n, row_ptr, col, val }
    }
}

/// Compressed sparse rows, square.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    /// Nonzero triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()).sum()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.val.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        self.triplets().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max) / scale
    }

    /// Principal submatrix on the listed indices (ascending).
    pub fn restrict(&self, keep: &[usize]) -> Csr {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut t = Triplets::new(keep.len());
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    t.push(k, map[j], v);
                }
            }
        }
        t.to_csr()
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Csr, s: f64) -> Csr {
        let mut t = Triplets::new(self.n);
        for (i, j, v) in self.triplets() {
            t.push(i, j, v);
        }
        for (i, j, v) in other.triplets() {
            t.push(i, j, s * v);
        }
        t.to_csr()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for (i, j, v) in self.triplets() {
            d[i * self.n + j] = v;
        }
        d
    }
}

/// Cholesky factor stored by rows over the lower envelope.
#[derive(Clone, Debug)]
pub struct Skyline {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl Skyline {
    /// Envelope size in doubles for a symmetric matrix.
    pub fn envelope_size(a: &Csr) -> usize {
        (0..a.dim()).map(|i| i + 1 - a.row(i).map(|(j, _)| j).min().unwrap_or(i).min(i)).sum()
    }

    /// Factors a symmetric positive definite matrix `A = L Lᵀ`.
    pub fn factor(a: &Csr) -> Result<Self> {
        let n = a.dim();
        let first: Vec<usize> = (0..n).map(|i| a.row(i).map(|(j, _)| j).min().unwrap_or(i).min(i)).collect();
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i + 1 - first[i]);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (before, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i + 1 - fi];
            for j in fi..i {
                let fj = first[j];
                let row_j = &before[start[j]..start[j] + j + 1 - fj];
                let k0 = fi.max(fj);
                let mut s = row_i[j - fi];
                let li = &row_i[k0 - fi..j - fi];
                let lj = &row_j[k0 - fj..j - fj];
                s -= li.iter().zip(lj).map(|(x, y)| x * y).sum::<f64>();
                row_i[j - fi] = s / row_j[j - fj];
            }
            let d = row_i[i - fi] - row_i[..i - fi].iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::NotPD { row: i, pivot: d });
            }
            row_i[i - fi] = Float::sqrt(d);
        }
        Ok(Self { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.start[i]..self.start[i + 1]]
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let r = self.row(i);
            let fi = self.first[i];
            let s: f64 = r[..i - fi].iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] = (x[i] - s) / r[i - fi];
        }
        for i in (0..n).rev() {
            let r = self.row(i);
            let fi = self.first[i];
            x[i] /= r[i - fi];
            let xi = x[i];
            for (xk, l) in x[fi..i].iter_mut().zip(&r[..i - fi]) {
                *xk -= l * xi;
            }
        }
    }

    /// Smallest diagonal entry of `L` squared; a cheap conditioning probe.
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim()).map(|i| self.row(i)[i - self.first[i]].powi(2)).fold(f64::INFINITY, f64::min)
    }
}
