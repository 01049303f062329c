//! Compressed-row complex sparse matrices.
//!
//! Only what the operator and Liouvillian assembly needs: construction from
//! triplets, Kronecker products, sums, products, adjoints and mat-vec.
//! Column indices are strictly increasing within each row and entries with
//! magnitude below [`DROP_TOL`] are never stored.

use std::ops::{Add, Mul, Neg, Sub};

use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use crate::error::{JcError, Result};

/// Entries smaller than this are dropped on construction.
pub const DROP_TOL: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct SparseComplexMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseComplexMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed; the result is pruned of entries below [`DROP_TOL`].
    ///
    /// Panics if an index is out of bounds.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v.norm() >= DROP_TOL {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(rows: &[Vec<Complex64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        Self::from_triplets(
            n_rows,
            n_cols,
            rows.iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Iterates over the stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Iterates over all stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.n_cols,
            self.n_rows,
            self.iter().map(|(i, j, v)| (j, i, v)),
        )
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(Complex64::conj).collect(),
            ..self.clone()
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.n_cols,
            self.n_rows,
            self.iter().map(|(i, j, v)| (j, i, v.conj())),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_triplets(
            self.n_rows,
            self.n_cols,
            self.iter().map(|(i, j, v)| (i, j, v * factor)),
        )
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let n_rows = self.n_rows * other.n_rows;
        let n_cols = self.n_cols * other.n_cols;
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        row_ptr.push(0);
        // Rows of the product are visited in order and, within a row, the
        // outer column index dominates, so columns come out sorted.
        for i in 0..self.n_rows {
            for k in 0..other.n_rows {
                for (j, a) in self.row(i) {
                    for (l, b) in other.row(k) {
                        let v = a * b;
                        if v.norm() >= DROP_TOL {
                            col_idx.push(j * other.n_cols + l);
                            values.push(v);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    fn merge(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(
            (self.n_rows, self.n_cols),
            (other.n_rows, other.n_cols),
            "shape mismatch in sparse sum"
        );
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for i in 0..self.n_rows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).map(|(j, v)| (j, v * sign)).peekable();
            loop {
                let next = match (a.peek(), b.peek()) {
                    (Some(&(ja, va)), Some(&(jb, vb))) => {
                        if ja == jb {
                            a.next();
                            b.next();
                            (ja, va + vb)
                        } else if ja < jb {
                            a.next();
                            (ja, va)
                        } else {
                            b.next();
                            (jb, vb)
                        }
                    }
                    (Some(&e), None) => {
                        a.next();
                        e
                    }
                    (None, Some(&e)) => {
                        b.next();
                        e
                    }
                    (None, None) => break,
                };
                if next.1.norm() >= DROP_TOL {
                    col_idx.push(next.0);
                    values.push(next.1);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse matrix product using a dense row accumulator.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.n_cols, other.n_rows,
            "shape mismatch in sparse product"
        );
        let mut acc = vec![ZERO; other.n_cols];
        let mut touched = vec![false; other.n_cols];
        let mut pattern = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n_rows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j].norm() >= DROP_TOL {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
                acc[j] = ZERO;
                touched[j] = false;
            }
            pattern.clear();
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut y = vec![ZERO; self.n_rows];
        self.mul_vec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(JcError::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(JcError::DimensionMismatch {
                expected: self.n_rows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
        Ok(())
    }

    /// Dense row-major copy. Intended for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![ZERO; self.n_cols]; self.n_rows];
        for (i, j, v) in self.iter() {
            out[i][j] = v;
        }
        out
    }

    /// Largest entrywise deviation from `self == self†`.
    pub fn hermitian_defect(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Copies into faer's compressed-column format, optionally replacing
    /// one row wholesale.
    pub(crate) fn to_faer_with_row(
        &self,
        replace: Option<(usize, &[(usize, Complex64)])>,
    ) -> Result<SparseColMat<usize, Complex64>> {
        let mut triplets: Vec<Triplet<usize, usize, Complex64>> = Vec::with_capacity(self.nnz());
        for (i, j, v) in self.iter() {
            if replace.is_some_and(|(r, _)| r == i) {
                continue;
            }
            triplets.push(Triplet::new(i, j, v));
        }
        if let Some((r, entries)) = replace {
            triplets.extend(entries.iter().map(|&(j, v)| Triplet::new(r, j, v)));
        }
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &triplets)
            .map_err(|e| JcError::SingularSystem(format!("{e:?}")))
    }
}

impl Add for &SparseComplexMatrix {
    type Output = SparseComplexMatrix;
    fn add(self, rhs: Self) -> SparseComplexMatrix {
        self.merge(rhs, 1.0)
    }
}

impl Sub for &SparseComplexMatrix {
    type Output = SparseComplexMatrix;
    fn sub(self, rhs: Self) -> SparseComplexMatrix {
        self.merge(rhs, -1.0)
    }
}

impl Mul for &SparseComplexMatrix {
    type Output = SparseComplexMatrix;
    fn mul(self, rhs: Self) -> SparseComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<Complex64> for &SparseComplexMatrix {
    type Output = SparseComplexMatrix;
    fn mul(self, rhs: Complex64) -> SparseComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &SparseComplexMatrix {
    type Output = SparseComplexMatrix;
    fn mul(self, rhs: f64) -> SparseComplexMatrix {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Neg for &SparseComplexMatrix {
    type Output = SparseComplexMatrix;
    fn neg(self) -> SparseComplexMatrix {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}
