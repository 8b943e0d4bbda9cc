//! Compressed sparse row matrices.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Build from (row, col, value) triplets; duplicates are summed and exact zeros kept out.
    pub fn from_triplets(rows: usize, cols: usize, trip: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut trip: Vec<(usize, usize, f64)> = trip.into_iter().collect();
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        let mut m = SparseMatrix { rows, cols, indptr, indices, values };
        m.prune(0.0);
        m
    }

    /// Drop stored entries with |v| <= threshold.
    pub fn prune(&mut self, threshold: f64) {
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].abs() > threshold {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate `(col, value)` over one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec operand length");
        for (r, yr) in y.iter_mut().enumerate().take(self.rows) {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *yr = s;
        }
    }

    /// `Aᵀ x` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "transposed matvec operand length");
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            let xr = x[r];
            if xr != 0.0 {
                for k in self.indptr[r]..self.indptr[r + 1] {
                    y[self.indices[k]] += self.values[k] * xr;
                }
            }
        }
        y
    }

    /// |A| |x| entrywise, the magnitude scale of the sums in A x.
    pub fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|r| self.row(r).map(|(c, v)| (v * x[c]).abs()).sum()).collect()
    }

    /// |A|ᵀ |x|.
    pub fn abs_tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols()];
        for (r, c, v) in self.triplets() {
            y[c] += (v * x[r]).abs();
        }
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
    }

    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut trip = Vec::new();
        let mut acc = vec![0.0; other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
            }
            touched.clear();
        }
        SparseMatrix::from_triplets(self.rows, other.cols, trip)
    }

    /// `Pᵀ A P`.
    pub fn congruence(&self, p: &SparseMatrix) -> SparseMatrix {
        p.transpose().matmul(&self.matmul(p))
    }

    pub fn add(&self, other: &SparseMatrix, alpha: f64) -> SparseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add shapes");
        SparseMatrix::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets().map(|(r, c, v)| (r, c, alpha * v))))
    }

    pub fn scale(&self, s: f64) -> SparseMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Keep only the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut cmap = vec![usize::MAX; self.cols];
        for (i, &c) in cols.iter().enumerate() {
            cmap[c] = i;
        }
        let trip = rows.iter().enumerate().flat_map(|(i, &r)| {
            let cmap = &cmap;
            self.row(r).filter(move |(c, _)| cmap[*c] != usize::MAX).map(move |(c, v)| (i, cmap[c], v))
        });
        SparseMatrix::from_triplets(rows.len(), cols.len(), trip.collect::<Vec<_>>())
    }

    /// Stack `[[A, Bᵀ], [B, C]]` (C may be absent = zero block).
    pub fn saddle(a: &SparseMatrix, b: &SparseMatrix, c: Option<&SparseMatrix>) -> SparseMatrix {
        let n = a.rows;
        let m = b.rows;
        let mut trip: Vec<_> = a.triplets().collect();
        for (r, col, v) in b.triplets() {
            trip.push((n + r, col, v));
            trip.push((col, n + r, v));
        }
        if let Some(c) = c {
            trip.extend(c.triplets().map(|(r, col, v)| (n + r, n + col, v)));
        }
        SparseMatrix::from_triplets(n + m, n + m, trip)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |A - Aᵀ| entry relative to the largest |A| entry.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.add(&t, -1.0).max_abs() / self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0), (0, 1, -1.0), (0, 1, 1.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn products_match_dense() {
        let a = SparseMatrix::from_triplets(3, 4, [(0, 1, 2.0), (1, 0, -1.0), (2, 3, 5.0), (2, 1, 1.5)]);
        let b = SparseMatrix::from_triplets(4, 2, [(1, 0, 1.0), (3, 1, 2.0), (0, 0, 3.0)]);
        let ab = a.matmul(&b).to_dense();
        assert_eq!(ab, a.to_dense() * b.to_dense());
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
        let x = [1.0, 2.0, 3.0];
        let y = a.tr_mul_vec(&x);
        let yd = a.to_dense().transpose() * nalgebra::DVector::from_row_slice(&x);
        assert_eq!(y, yd.as_slice());
    }

    #[test]
    fn saddle_layout() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 1, 1.0)]);
        let k = SparseMatrix::saddle(&a, &b, None).to_dense();
        assert_eq!(k[(2, 1)], 1.0);
        assert_eq!(k[(1, 2)], 1.0);
        assert_eq!(k[(2, 2)], 0.0);
    }
}
