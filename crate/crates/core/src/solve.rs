//! Sparse system storage, direct solves and inf-sup constant estimation.

use crate::error::{Error, Result};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, SymmetricEigen};
use std::ops::Range;

/// Coordinate-format matrix with duplicate-summing semantics.
#[derive(Clone, Debug, Default)]
pub struct TripletBuffer {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuffer { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn extend(&mut self, it: impl IntoIterator<Item = (usize, usize, f64)>) {
        for (i, j, v) in it {
            self.push(i, j, v);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sort column-major and merge duplicates.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|e| (e.1, e.0));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_csc(&self) -> Result<SparseColMat<usize, f64>> {
        let trip: Vec<Triplet<usize, usize, f64>> =
            self.entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .map_err(|e| Error::Singular(format!("sparse build failed: {e:?}")))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// max |K - K^T| relative to max |K|.
    pub fn asymmetry(&self) -> f64 {
        let mut c = self.clone();
        c.compress();
        let mut t: Vec<(usize, usize, f64)> = c.entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        t.sort_by_key(|e| (e.1, e.0));
        let scale = c.entries.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
        let mut a = c.entries.iter().peekable();
        let mut b = t.iter().peekable();
        let mut dev = 0.0f64;
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(x), None) => {
                    dev = dev.max(x.2.abs());
                    a.next();
                }
                (None, Some(y)) => {
                    dev = dev.max(y.2.abs());
                    b.next();
                }
                (Some(x), Some(y)) => {
                    let kx = (x.1, x.0);
                    let ky = (y.1, y.0);
                    if kx == ky {
                        dev = dev.max((x.2 - y.2).abs());
                        a.next();
                        b.next();
                    } else if kx < ky {
                        dev = dev.max(x.2.abs());
                        a.next();
                    } else {
                        dev = dev.max(y.2.abs());
                        b.next();
                    }
                }
            }
        }
        if scale > 0.0 {
            dev / scale
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Square system with named unknown blocks.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: TripletBuffer,
    pub rhs: Vec<f64>,
    pub blocks: Vec<(String, Range<usize>)>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// ||K x - b|| / ||b||, recomputed after the solve.
    pub residual: f64,
    pub nnz: usize,
    pub n: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse LU with partial pivoting.
pub fn solve_direct(sys: &SparseSystem) -> Result<SolveReport> {
    let n = sys.rhs.len();
    if sys.matrix.nrows != n || sys.matrix.ncols != n {
        return Err(Error::Singular(format!(
            "system is {}x{} with rhs of length {n}",
            sys.matrix.nrows, sys.matrix.ncols
        )));
    }
    let mut m = sys.matrix.clone();
    m.compress();
    let a = m.to_csc()?;
    // Sequential factorization keeps results independent of the thread count.
    faer::set_global_parallelism(faer::Par::Seq);
    let lu = a.sp_lu().map_err(|e| Error::Singular(format!("factorization failed: {e:?}")))?;
    let b = Mat::<f64>::from_fn(n, 1, |i, _| sys.rhs[i]);
    let sol = lu.solve(&b);
    let x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    let kx = m.matvec(&x);
    let r: Vec<f64> = kx.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
    let bn = norm(&sys.rhs);
    let residual = if bn > 0.0 { norm(&r) / bn } else { norm(&r) };
    if !residual.is_finite() {
        return Err(Error::Singular("factorization produced non-finite values".into()));
    }
    if residual > 1e-6 {
        // Name the block carrying the largest residual share.
        let worst = sys
            .blocks
            .iter()
            .map(|(name, rg)| (name.clone(), norm(&r[rg.clone()])))
            .fold((String::from("?"), -1.0), |a, b| if !(b.1 <= a.1) { b } else { a });
        return Err(Error::Singular(format!(
            "relative residual {residual:e}; block `{}` is rank deficient",
            worst.0
        )));
    }
    Ok(SolveReport { x, residual, nnz: m.len(), n })
}

/// Smallest nonzero generalized singular value of B (m x n) for the norms given by SPD
/// Gram matrices X (n x n) and M (m x m): sqrt of the smallest nonzero eigenvalue of
/// B X^{-1} B^T v = mu M v.
pub fn estimate_infsup(b: &DMatrix<f64>, x: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64> {
    const BUDGET: usize = 5000;
    let total = b.nrows() + b.ncols();
    if total > BUDGET {
        return Err(Error::Budget(format!("{total} unknowns exceed the dense limit {BUDGET}")));
    }
    let cx = x
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("norm matrix X is not positive definite".into()))?;
    let y = cx.solve(&b.transpose());
    let s = b * y;
    let cm = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("norm matrix M is not positive definite".into()))?;
    let l = cm.l();
    let li =
        l.clone().try_inverse().ok_or_else(|| Error::Singular("Cholesky factor of M is singular".into()))?;
    let c = &li * s * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let tol = 1e-10 * max.max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.iter().filter(|&&v| v > tol).fold(f64::INFINITY, |a, &v| a.min(v));
    if !min.is_finite() {
        return Err(Error::Singular("coupling operator is zero".into()));
    }
    Ok(min.sqrt())
}
