//! Compressed-row sparse matrices.

use std::io::{self, Write};
use std::ops::{AddAssign, Mul};

use nalgebra::DMatrix;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T = f64> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T> SparseMatrix<T>
where
    T: Copy + Zero + PartialEq + AddAssign + Mul<Output = T> + nalgebra::Scalar,
{
    /// Assembles from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut t: Vec<(usize, usize, T)> = triplets.into_iter().collect();
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<T> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { rows, cols, indptr, indices, values };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| !v.is_zero()) {
            return;
        }
        let mut indptr = vec![0; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if !self.values[k].is_zero() {
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

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: vec![], values: vec![] }
    }

    pub fn from_dense(m: &DMatrix<T>) -> Self {
        let trip = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, m[(r, c)]));
        Self::from_triplets(m.nrows(), m.ncols(), trip)
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

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        match self.indices[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => T::zero(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::from_element(self.rows, self.cols, T::zero());
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Writes one `row col value` line per stored entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()>
    where
        T: std::fmt::Display,
    {
        writeln!(w, "% {} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{r} {c} {v}")?;
        }
        Ok(())
    }
}

impl SparseMatrix<f64> {
    /// `max |A_ij + A_ji|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (r, c, v) in self.iter() {
            worst = worst.max((v + self.get(c, r)).abs());
        }
        worst
    }

    /// Row-sum norm, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let m = SparseMatrix::from_triplets(2, 3, [(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)]);
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, -2.0]);
        let t = m.transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.get(2, 0), 2.0);
        assert_eq!(t.to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn antisymmetry() {
        let k = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.5), (1, 0, -1.5)]);
        assert_eq!(k.antisymmetry_defect(), 0.0);
        let s = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.5), (1, 0, 1.5)]);
        assert_eq!(s.antisymmetry_defect(), 3.0);
    }

    #[test]
    fn coordinate_export() {
        let k = SparseMatrix::from_triplets(2, 2, [(0, 1, 0.5), (1, 0, -0.5)]);
        let mut buf = Vec::new();
        k.write_coordinate(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "% 2 2 2\n0 1 0.5\n1 0 -0.5\n");
    }
}
