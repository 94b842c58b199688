use nalgebra::{DMatrix, DVector};

use rayon::prelude::*;

use crate::C64;

const PARALLEL_WORK: usize = 1 << 16;

/// Square compressed-sparse-row matrix.
///
/// Operators on the hybrid space are overwhelmingly sparse (ladder
/// operators, phased permutations, block-diagonal beam splitters), so they
/// are stored row-compressed and expanded to dense on demand.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Csr {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    pub fn identity(dim: usize) -> Self {
        Csr {
            dim,
            indptr: (0..=dim).collect(),
            indices: (0..dim).collect(),
            values: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn diagonal(values: impl IntoIterator<Item = C64>) -> Self {
        Self::from_triplets_sized(None, values.into_iter().enumerate().map(|(i, v)| (i, i, v)))
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        Self::from_triplets_sized(Some(dim), triplets)
    }

    fn from_triplets_sized(
        dim: Option<usize>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        let dim = dim.unwrap_or_else(|| t.iter().map(|&(r, c, _)| r.max(c) + 1).max().unwrap_or(0));
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; dim + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Csr {
            dim,
            indptr,
            indices,
            values,
        };
        m.prune(0.0);
        m
    }

    pub fn from_dense(m: &DMatrix<C64>, tol: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let dim = m.nrows();
        let mut triplets = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                if v.norm() > tol {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(dim, triplets)
    }

    /// Drops entries with magnitude `<= tol`.
    pub fn prune(&mut self, tol: f64) {
        let mut indptr = vec![0; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.values[k];
                if v.norm() > tol {
                    indices.push(self.indices[k]);
                    values.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Csr {
        Csr::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Csr {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Csr) -> Csr {
        assert_eq!(self.dim, other.dim);
        Csr::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut cols = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &cols {
                triplets.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            cols.clear();
        }
        Csr::from_triplets(self.dim, triplets)
    }

    pub fn mul_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.dim);
        DVector::from_iterator(
            self.dim,
            (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum::<C64>()),
        )
    }

    /// Dense product `self · m`. Columns are processed in parallel for
    /// large operands.
    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(m.nrows(), self.dim);
        let dim = self.dim;
        let mut out = DMatrix::zeros(dim, m.ncols());
        if dim == 0 {
            return out;
        }
        let column = |j: usize, out_col: &mut [C64]| {
            let col = m.column(j);
            for (r, slot) in out_col.iter_mut().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for k in self.indptr[r]..self.indptr[r + 1] {
                    s += self.values[k] * col[self.indices[k]];
                }
                *slot = s;
            }
        };
        if self.nnz() * m.ncols() > PARALLEL_WORK {
            out.as_mut_slice()
                .par_chunks_mut(dim)
                .enumerate()
                .for_each(|(j, c)| column(j, c));
        } else {
            out.as_mut_slice()
                .chunks_mut(dim)
                .enumerate()
                .for_each(|(j, c)| column(j, c));
        }
        out
    }

    /// `self · m · self†`.
    pub fn sandwich(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let left = self.mul_dense(m);
        self.mul_dense(&left.adjoint()).adjoint()
    }

    /// Largest absolute row sum; an upper bound on the spectral norm of a
    /// Hermitian matrix.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - self.get(c, r).conj()).norm());
        }
        worst
    }

    /// Whether the matrix is diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }
}
