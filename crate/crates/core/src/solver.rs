//! Symmetric positive definite sparse matrices and linear solvers.
//!
//! The default path factors the matrix once with a sparse Cholesky
//! decomposition and reuses the factor for several right-hand sides. Jacobi
//! preconditioned conjugate gradients and a dense Cholesky are available for
//! comparison and small oracle problems.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Compressed-row symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpdMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSpdMatrix {
    /// Sums duplicate entries. Column indices within a row end up sorted.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> SparseSpdMatrix {
        let mut counts = vec![0usize; dim + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..dim {
            order.clear();
            order.extend(counts[i]..counts[i + 1]);
            // Stable sort keeps the summation order of duplicates fixed.
            order.sort_by_key(|&k| cols[k]);
            for &k in &order {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == cols[k] {
                    *values.last_mut().unwrap() += vals[k];
                } else {
                    col_idx.push(cols[k]);
                    values.push(vals[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSpdMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(dim: usize) -> SparseSpdMatrix {
        let t: Vec<_> = (0..dim).map(|i| (i, i, 1.0)).collect();
        SparseSpdMatrix::from_triplets(dim, &t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    fn to_faer(&self) -> SparseColMat<usize, f64> {
        let triplets: Vec<_> = (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &triplets).expect("indices are in range")
    }
}

/// Relative residual `|Ax - b| / |b|` (absolute when `b = 0`).
pub fn relative_residual(a: &SparseSpdMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Normwise backward error `|Ax - b|∞ / (|A|∞ |x|∞ + |b|∞)`.
pub fn backward_error(a: &SparseSpdMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let norm_a = (0..a.dim()).fold(0.0f64, |m, i| m.max(a.row(i).map(|(_, v)| v.abs()).sum()));
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = norm_a * inf(x) + inf(b);
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// Sparse Cholesky factor, reusable for several right-hand sides.
pub struct CholeskySolver {
    matrix: SparseSpdMatrix,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl CholeskySolver {
    pub fn new(a: &SparseSpdMatrix) -> Result<CholeskySolver> {
        // Single-threaded kernels keep results bitwise reproducible.
        faer::set_global_parallelism(faer::Par::Seq);
        let llt = a
            .to_faer()
            .sp_cholesky(Side::Lower)
            .map_err(|_| Error::NotPositiveDefinite)?;
        Ok(CholeskySolver { matrix: a.clone(), llt })
    }

    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves `Ax = b`, with a few steps of iterative refinement if the
    /// normwise backward error exceeds `rel_tol`.
    pub fn solve(&self, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
        if b.len() != self.matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.dim(),
                found: b.len(),
            });
        }
        if b.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.apply(b);
        let mut res = backward_error(&self.matrix, &x, b);
        let mut steps = 0;
        while res > rel_tol && steps < 5 {
            let ax = self.matrix.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.apply(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            res = backward_error(&self.matrix, &x, b);
            steps += 1;
        }
        if !(res <= rel_tol) {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: res,
            });
        }
        Ok(x)
    }
}

/// Solves `Ax = b` to normwise backward error `rel_tol` with a sparse Cholesky factorization.
pub fn solve(a: &SparseSpdMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    CholeskySolver::new(a)?.solve(b, rel_tol)
}

/// Jacobi-preconditioned conjugate gradients, capped at `max_iter` iterations.
pub fn pcg(a: &SparseSpdMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    let nb = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * nb {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if it + 1 == max_iter {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: dot(&r, &r).sqrt() / nb,
    })
}

/// Dense Cholesky solve; meant for small systems and test oracles.
pub fn dense_solve(a: &SparseSpdMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = a.to_dense().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> SparseSpdMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = m.transpose() * &m + DMatrix::identity(n, n);
        let t: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, a[(i, j)]))
            .collect();
        SparseSpdMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_are_summed() {
        let a = SparseSpdMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0), (0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.max_asymmetry(), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![5.0, 3.0]);
    }

    #[test]
    fn zero_rhs_and_identity() {
        let a = random_spd(5, 1);
        assert_eq!(solve(&a, &[0.0; 5], 1e-10).unwrap(), vec![0.0; 5]);
        let b = vec![1.0, -2.0, 3.5];
        let x = solve(&SparseSpdMatrix::identity(3), &b, 1e-10).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn matches_dense_oracle() {
        let a = random_spd(50, 2);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let oracle = a.to_dense().cholesky().unwrap().solve(&DVector::from_column_slice(&b));
        let x = solve(&a, &b, 1e-10).unwrap();
        let y = pcg(&a, &b, 1e-12, 1000).unwrap();
        for i in 0..50 {
            assert!((x[i] - oracle[i]).abs() < 1e-8);
            assert!((y[i] - oracle[i]).abs() < 1e-8);
        }
        assert!(relative_residual(&a, &x, &b) <= 1e-10);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = SparseSpdMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(CholeskySolver::new(&a), Err(Error::NotPositiveDefinite)));
        assert!(dense_solve(&a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn backward_error_of_a_perturbed_solution() {
        let a = SparseSpdMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 1, 4.0), (0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(backward_error(&a, &[1.0, 1.0], &[3.0, 5.0]), 0.0);
        // r = (0.5, 0.25), |A|∞ = 5, |x|∞ = 1.25, |b|∞ = 5.
        let e = backward_error(&a, &[1.25, 1.0], &[3.0, 5.0]);
        assert!((e - 0.5 / 11.25).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let s = CholeskySolver::new(&SparseSpdMatrix::identity(3)).unwrap();
        assert!(matches!(s.solve(&[1.0], 1e-10), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pcg_reports_iteration_cap() {
        let a = random_spd(30, 3);
        let b = vec![1.0; 30];
        assert!(matches!(pcg(&a, &b, 1e-14, 2), Err(Error::NoConvergence { .. })));
    }
}
