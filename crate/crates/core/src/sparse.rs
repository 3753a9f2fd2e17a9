//! Compressed sparse row storage and a profile (skyline) LDLᵀ factorization.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square or rectangular matrix in CSR layout with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Build from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable, so duplicate entries are summed in insertion order
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for t in order {
            let (r, c, v) = triplets[t];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
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

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or_else(|_| T::zero())
    }

    /// `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *out = acc;
        }
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.nrows).map(|r| self.row(r).1.iter().copied().sum()).collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.nrows == self.ncols
            && self
                .iter()
                .all(|(r, c, v)| (v - self.get(c, r)).abs() <= tol * v.abs().max(T::one()))
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            d[r][c] = v;
        }
        d
    }

    /// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern.
    /// `perm[new] = old`.
    pub fn reverse_cuthill_mckee(&self) -> Vec<usize> {
        let n = self.nrows;
        let degree: Vec<usize> = (0..n).map(|r| self.row(r).0.len()).collect();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut seeds: Vec<usize> = (0..n).collect();
        seeds.sort_by_key(|&v| (degree[v], v));
        for &seed in &seeds {
            if visited[seed] {
                continue;
            }
            let start = self.pseudo_peripheral(seed);
            visited[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut next: Vec<usize> = self
                    .row(v)
                    .0
                    .iter()
                    .copied()
                    .filter(|&w| !visited[w])
                    .collect();
                next.sort_by_key(|&w| (degree[w], w));
                for w in next {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order.reverse();
        order
    }

    /// Eccentricity of `start` and a minimum-degree vertex on its last BFS level.
    fn farthest(&self, start: usize) -> (usize, usize) {
        let mut depth = vec![usize::MAX; self.nrows];
        depth[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut best = (0, start);
        while let Some(v) = queue.pop_front() {
            let deg = self.row(v).0.len();
            if depth[v] > best.0 || (depth[v] == best.0 && deg < self.row(best.1).0.len()) {
                best = (depth[v], v);
            }
            for &w in self.row(v).0 {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        best
    }

    fn pseudo_peripheral(&self, seed: usize) -> usize {
        let (mut ecc, mut far) = self.farthest(seed);
        let mut current = seed;
        for _ in 0..16 {
            let (e, f) = self.farthest(far);
            if e <= ecc {
                break;
            }
            (current, far, ecc) = (far, f, e);
        }
        current
    }
}

/// `M = P (L D Lᵀ) Pᵀ` for a symmetric matrix, stored by row envelope.
///
/// No pivoting: valid for definite matrices and used with shifts that keep
/// pivots away from zero. The count of negative pivots is the number of
/// negative eigenvalues (Sylvester's law of inertia).
#[derive(Debug, Clone)]
pub struct SkylineLdlt<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> SkylineLdlt<T> {
    /// Factor `matrix + diag(shift)` after a reverse Cuthill-McKee reordering.
    pub fn factor(matrix: &CsrMatrix<T>, shift: &[T]) -> Result<Self> {
        let n = matrix.nrows();
        assert_eq!(matrix.ncols(), n);
        assert_eq!(shift.len(), n);
        let perm = matrix.reverse_cuthill_mckee();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (r, c, _) in matrix.iter() {
            let (i, j) = (inv[r], inv[c]);
            if j < i {
                first[i] = first[i].min(j);
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![T::zero(); start[n]];
        let mut diag = vec![T::zero(); n];
        for (r, c, v) in matrix.iter() {
            let (i, j) = (inv[r], inv[c]);
            if j < i {
                lower[start[i] + (j - first[i])] = v;
            } else if i == j {
                diag[i] = v + shift[r];
            }
        }

        let scale = diag.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        let tiny = scale * T::epsilon() * T::of(16.0);
        // row i of `lower` holds M_ij on entry and L_ij on exit
        let mut w = vec![T::zero(); n];
        for i in 0..n {
            let fi = first[i];
            let row = start[i]..start[i + 1];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = lower[row.start + (j - fi)];
                let lj = &lower[start[j]..start[j + 1]];
                for k in lo..j {
                    s -= w[k] * lj[k - fj];
                }
                w[j] = s;
            }
            let mut d = diag[i];
            for j in fi..i {
                let l = w[j] / diag[j];
                lower[row.start + (j - fi)] = l;
                d -= w[j] * l;
            }
            if d.abs() <= tiny || !d.is_finite() {
                return Err(Error::Singular(format!(
                    "zero pivot {d:e} at row {i} of {n} in LDLᵀ"
                )));
            }
            diag[i] = d;
        }
        Ok(SkylineLdlt {
            perm,
            first,
            start,
            lower,
            diag,
        })
    }

    /// Number of negative pivots, i.e. eigenvalues of the factored matrix below zero.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|d| **d < T::zero()).count()
    }

    /// Stored envelope size.
    pub fn profile(&self) -> usize {
        self.lower.len()
    }

    /// Solve `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.diag.len();
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let l = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (k, &lv) in l.iter().enumerate() {
                s -= lv * y[fi + k];
            }
            y[i] = s;
        }
        for (yi, d) in y.iter_mut().zip(&self.diag) {
            *yi /= *d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i];
            let l = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, &lv) in l.iter().enumerate() {
                y[fi + k] -= lv * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }
}
