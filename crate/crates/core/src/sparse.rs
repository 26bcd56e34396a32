//! Compressed sparse row matrices over `Complex64`.
//!
//! Only the handful of operations the Liouvillian assembly and the
//! propagators need: Kronecker products, linear combinations, products,
//! adjoints, matrix-vector products and principal submatrices.

use ndarray::Array2;
use num_complex::Complex64;

use crate::C64_ZERO;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed; entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != C64_ZERO {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn from_dense(dense: &Array2<Complex64>) -> Self {
        let (nrows, ncols) = dense.dim();
        Self::from_triplets(
            nrows,
            ncols,
            dense.indexed_iter().filter(|(_, v)| **v != C64_ZERO).map(|((r, c), &v)| (r, c, v)),
        )
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.iter() {
            out[[r, c]] = v;
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => C64_ZERO,
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(self.nrows, self.ncols, self.iter().map(|(r, c, v)| (r, c, v * s)))
    }

    /// `sum_k coeff_k * M_k` over matrices of equal shape.
    pub fn linear_combination(terms: &[(Complex64, &CsrMatrix)]) -> Self {
        let (nrows, ncols) = terms.first().map_or((0, 0), |(_, m)| (m.nrows, m.ncols));
        for (_, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols), "shape mismatch");
        }
        Self::from_triplets(
            nrows,
            ncols,
            terms.iter().flat_map(|&(s, m)| m.iter().map(move |(r, c, v)| (r, c, s * v))),
        )
    }

    pub fn add(&self, other: &CsrMatrix) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &CsrMatrix) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self), (-one, other)])
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimension mismatch");
        let mut triplets = Vec::new();
        for (r, k, a) in self.iter() {
            let (cols, vals) = other.row(k);
            triplets.extend(cols.iter().zip(vals).map(|(&c, &b)| (r, c, a * b)));
        }
        Self::from_triplets(self.nrows, other.ncols, triplets)
    }

    /// Kronecker product `self ⊗ other`; `self` indexes the slow factor.
    pub fn kron(&self, other: &CsrMatrix) -> Self {
        let (br, bc) = (other.nrows, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, a) in self.iter() {
            for (r2, c2, b) in other.iter() {
                triplets.push((r1 * br + r2, c1 * bc + c2, a * b));
            }
        }
        Self::from_triplets(self.nrows * br, self.ncols * bc, triplets)
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.indptr[r]..self.indptr[r + 1];
            let mut acc = C64_ZERO;
            for (&c, &v) in self.indices[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[c];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![C64_ZERO; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest absolute row sum (the induced infinity norm).
    pub fn max_row_abs_sum(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on the given (sorted, unique) index set.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.ncols];
        for (k, &i) in keep.iter().enumerate() {
            position[i] = k;
        }
        let mut triplets = Vec::new();
        for (k, &r) in keep.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if position[c] != usize::MAX {
                    triplets.push((k, position[c], v));
                }
            }
        }
        Self::from_triplets(keep.len(), keep.len(), triplets)
    }

    /// Copy with row `r` replaced by the given entries.
    pub fn with_row_replaced(&self, r: usize, entries: &[(usize, Complex64)]) -> Self {
        let mut triplets: Vec<_> = self.iter().filter(|&(row, _, _)| row != r).collect();
        triplets.extend(entries.iter().map(|&(c, v)| (r, c, v)));
        Self::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub(crate) fn to_faer(&self) -> faer::sparse::SparseColMat<usize, Complex64> {
        use faer::sparse::{SparseColMat, Triplet};
        let triplets: Vec<_> = self.iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .expect("triplets come from a valid CSR matrix")
    }
}
