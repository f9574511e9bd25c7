//! Compressed sparse row storage, triplet accumulation and symmetric
//! elimination of Dirichlet dofs.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Unordered `(row, col, value)` entries; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct Triplets<T> {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> Triplets<T> {
    pub fn new(n: usize) -> Self {
        Self { n, rows: Vec::new(), cols: Vec::new(), vals: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, rows: Vec::with_capacity(cap), cols: Vec::with_capacity(cap), vals: Vec::with_capacity(cap) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    /// Scatters a dense local block `local[a][b]` onto `dofs[a], dofs[b]`.
    pub fn push_block<const N: usize>(&mut self, dofs: &[usize; N], local: &[[T; N]; N]) {
        for a in 0..N {
            for b in 0..N {
                if local[a][b] != T::zero() {
                    self.push(dofs[a], dofs[b], local[a][b]);
                }
            }
        }
    }

    pub fn extend(&mut self, other: Triplets<T>) {
        assert_eq!(self.n, other.n);
        self.rows.extend(other.rows);
        self.cols.extend(other.cols);
        self.vals.extend(other.vals);
    }

    pub fn into_csr(self) -> CsrMatrix<T> {
        CsrMatrix::from_triplets(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn from_triplets(t: Triplets<T>) -> Self {
        let n = t.n;
        let mut counts = vec![0usize; n + 1];
        for &r in &t.rows {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut order = vec![0usize; t.vals.len()];
        for (k, &r) in t.rows.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(t.vals.len() / 4);
        let mut values = Vec::with_capacity(t.vals.len() / 4);
        row_ptr.push(0);
        for i in 0..n {
            let seg = &mut order[counts[i]..counts[i + 1]];
            seg.sort_by_key(|&k| t.cols[k]);
            let mut last = usize::MAX;
            for &k in seg.iter() {
                let c = t.cols[k];
                if c == last {
                    *values.last_mut().expect("entry present") += t.vals[k];
                } else {
                    col_idx.push(c);
                    values.push(t.vals[k]);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![T::one(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        crate::scalar::dot(x, &self.mul_vec(x))
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        crate::scalar::dot(x, &self.mul_vec(y))
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// `||A - A^T||_F / ||A||_F`.
    pub fn symmetry_error(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let d = v - self.get(j, i);
                s += d * d;
            }
        }
        let norm = self.frobenius_norm();
        if norm == T::zero() {
            T::zero()
        } else {
            s.sqrt() / norm
        }
    }

    /// Sum `self + scale * other` (same dimension).
    pub fn add_scaled(&self, scale: T, other: &CsrMatrix<T>) -> CsrMatrix<T> {
        assert_eq!(self.n, other.n);
        let mut t = Triplets::with_capacity(self.n, self.nnz() + other.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                t.push(i, j, a);
            }
            let (c, v) = other.row(i);
            for (&j, &a) in c.iter().zip(v) {
                t.push(i, j, scale * a);
            }
        }
        t.into_csr()
    }

    pub fn scaled(&self, s: T) -> CsrMatrix<T> {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Row-major dense copy, for small test systems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j] = a;
            }
        }
        d
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix<T> {
        let mut map = vec![usize::MAX; self.n];
        for (k, &g) in keep.iter().enumerate() {
            map[g] = k;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &g in keep {
            let (c, v) = self.row(g);
            for (&j, &a) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    col_idx.push(map[j]);
                    values.push(a);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n: keep.len(), row_ptr, col_idx, values }
    }
}

/// Symmetric matrix with right-hand side; `dofs[k]` is the global dof of
/// local unknown `k` (the identity for unreduced systems).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub dofs: Vec<usize>,
}

impl<T: Real> SparseSystem<T> {
    pub fn new(matrix: CsrMatrix<T>, rhs: Vec<T>) -> Result<Self> {
        if rhs.len() != matrix.dim() {
            return Err(Error::DimensionMismatch { expected: matrix.dim(), found: rhs.len() });
        }
        let dofs = (0..rhs.len()).collect();
        Ok(Self { matrix, rhs, dofs })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Scatters a reduced solution into a full-length vector holding the
    /// prescribed values elsewhere.
    pub fn expand(&self, reduced: &[T], prescribed: &[T]) -> Vec<T> {
        let mut full = prescribed.to_vec();
        for (k, &g) in self.dofs.iter().enumerate() {
            full[g] = reduced[k];
        }
        full
    }
}

/// Eliminates constrained dofs symmetrically: keeps the free block `K_ff`
/// and moves `K_fc g` to the right-hand side.
pub fn apply_dirichlet<T: Real>(system: &SparseSystem<T>, constrained: &[bool], values: &[T]) -> Result<SparseSystem<T>> {
    let n = system.dim();
    if constrained.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: constrained.len() });
    }
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: values.len() });
    }
    let free: Vec<usize> = (0..n).filter(|&i| !constrained[i]).collect();
    let mut rhs = Vec::with_capacity(free.len());
    for &g in &free {
        let (cols, vals) = system.matrix.row(g);
        let mut r = system.rhs[g];
        for (&j, &a) in cols.iter().zip(vals) {
            if constrained[j] {
                r -= a * values[j];
            }
        }
        rhs.push(r);
    }
    let matrix = system.matrix.submatrix(&free);
    let dofs = free.iter().map(|&k| system.dofs[k]).collect();
    Ok(SparseSystem { matrix, rhs, dofs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(n: usize) -> CsrMatrix<f64> {
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
                t.push(i - 1, i, -1.0);
            }
        }
        t.into_csr()
    }

    #[test]
    fn duplicates_are_summed_in_order() {
        let mut t = Triplets::new(2);
        t.push(1, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push(1, 0, 0.5);
        t.push(0, 1, 3.0);
        let a = t.into_csr();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 0), 1.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.to_dense(), vec![vec![2.0, 3.0], vec![1.5, 0.0]]);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![8.0, 1.5]);
    }

    #[test]
    fn symmetry_error_detects_asymmetry() {
        assert_eq!(poisson(5).symmetry_error(), 0.0);
        let mut t = Triplets::new(2);
        t.push(0, 1, 1.0);
        assert!(t.into_csr().symmetry_error() > 0.5);
    }

    #[test]
    fn fully_constrained_system_is_empty() {
        let s = SparseSystem::new(poisson(3), vec![1.0; 3]).unwrap();
        let r = apply_dirichlet(&s, &[true; 3], &[0.0; 3]).unwrap();
        assert_eq!(r.dim(), 0);
        assert_eq!(r.matrix.nnz(), 0);
    }

    #[test]
    fn homogeneous_elimination_keeps_rhs() {
        let s = SparseSystem::new(poisson(4), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = apply_dirichlet(&s, &[true, false, false, true], &[0.0; 4]).unwrap();
        assert_eq!(r.rhs, vec![2.0, 3.0]);
        assert_eq!(r.dofs, vec![1, 2]);
        assert_eq!(r.matrix.to_dense(), vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
    }

    #[test]
    fn inhomogeneous_elimination_moves_columns() {
        let s = SparseSystem::new(poisson(3), vec![0.0; 3]).unwrap();
        let r = apply_dirichlet(&s, &[true, false, true], &[1.0, 0.0, 3.0]).unwrap();
        // 2 u1 = 0 + 1 + 3
        assert_eq!(r.rhs, vec![4.0]);
        let full = r.expand(&[2.0], &[1.0, 0.0, 3.0]);
        assert_eq!(full, vec![1.0, 2.0, 3.0]);
        assert!(apply_dirichlet(&s, &[true], &[0.0]).is_err());
    }
}
