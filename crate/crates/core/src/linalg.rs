//! Symmetric sparse systems: assembly, direct and iterative solves, spectral bounds.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};

/// Largest dimension handled by the dense symmetric eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Direct,
    ConjugateGradient,
}

/// Symmetric matrix accumulated from entries; duplicate entries are summed.
#[derive(Clone, Debug)]
pub struct SymAssembler {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymAssembler {
    pub fn new(n: usize) -> Self {
        SymAssembler {
            n,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.rows.push(i);
        self.cols.push(i);
        self.vals.push(v);
    }

    /// Adds `v` at `(i, j)` and `(j, i)`.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.rows.extend([i, j]);
        self.cols.extend([j, i]);
        self.vals.extend([v, v]);
    }

    /// Adds the weighted edge term `w (x_i - x_j)^2`-Hessian block.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        self.add_diag(i, w);
        self.add_diag(j, w);
        self.add_sym(i, j, -w);
    }

    pub fn to_csc(&self) -> CscMatrix<f64> {
        self.to_csc_shifted(0.0)
    }

    pub fn to_csc_shifted(&self, shift: f64) -> CscMatrix<f64> {
        let mut coo = CooMatrix::new(self.n, self.n);
        for k in 0..self.vals.len() {
            coo.push(self.rows[k], self.cols[k], self.vals[k]);
        }
        for i in 0..self.n {
            coo.push(i, i, -shift);
        }
        CscMatrix::from(&coo)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for k in 0..self.vals.len() {
            m[(self.rows[k], self.cols[k])] += self.vals[k];
        }
        m
    }
}

pub fn matvec(a: &CscMatrix<f64>, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    // Symmetric, so the column loop computes A x.
    for (j, col) in (0..a.ncols()).map(|j| (j, a.col(j))) {
        let xj = x[j];
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            out[i] += v * xj;
        }
    }
}

pub fn cholesky_solve(a: &CscMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let chol = CscCholesky::factor(a)
        .map_err(|_| Error::Singular(format!("{}x{} system is not positive definite", a.nrows(), a.ncols())))?;
    let x = chol.solve(&DVector::from_column_slice(b));
    Ok(x.as_slice().to_vec())
}

/// Jacobi-preconditioned conjugate gradient, stopping at `‖r‖ <= tol ‖b‖`.
pub fn cg_solve(a: &CscMatrix<f64>, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let mut diag = vec![0.0; n];
    for (j, d) in diag.iter_mut().enumerate() {
        let col = a.col(j);
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            if i == j {
                *d += v;
            }
        }
    }
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(Error::Singular("nonpositive diagonal in CG".into()));
    }
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        matvec(a, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Singular("CG encountered nonpositive curvature".into()));
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        // Refresh the recursive residual periodically to avoid drift.
        if it % 50 == 49 {
            matvec(a, &x, &mut ap);
            for k in 0..n {
                r[k] = b[k] - ap[k];
            }
        }
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return Ok(x);
        }
        for k in 0..n {
            z[k] = r[k] / diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::NoConvergence(format!(
        "CG reached {max_iter} iterations without relative residual {tol:e}"
    )))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve(a: &SymAssembler, b: &[f64], method: SolveMethod) -> Result<Vec<f64>> {
    let csc = a.to_csc();
    match method {
        SolveMethod::Direct => cholesky_solve(&csc, b),
        SolveMethod::ConjugateGradient => cg_solve(&csc, b, 1e-12, 20 * a.dim() + 100),
    }
}

pub fn is_positive_definite(a: &SymAssembler, shift: f64) -> bool {
    CscCholesky::factor(&a.to_csc_shifted(shift)).is_ok()
}

/// Smallest eigenvalue: dense decomposition up to [`DENSE_EIGEN_LIMIT`], otherwise bisection
/// on the shift using Cholesky positive-definiteness tests (absolute accuracy `1e-11`).
pub fn min_eigenvalue(a: &SymAssembler) -> f64 {
    if a.dim() == 0 {
        return f64::INFINITY;
    }
    if a.dim() <= DENSE_EIGEN_LIMIT {
        return SymmetricEigen::new(a.to_dense()).eigenvalues.min();
    }
    let csc = a.to_csc();
    // Gershgorin bounds bracket the spectrum.
    let mut radius = vec![0.0f64; a.dim()];
    let mut center = vec![0.0f64; a.dim()];
    for j in 0..a.dim() {
        let col = csc.col(j);
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            if i == j {
                center[j] += v;
            } else {
                radius[j] += v.abs();
            }
        }
    }
    let mut lo = center
        .iter()
        .zip(&radius)
        .map(|(c, r)| c - r)
        .fold(f64::INFINITY, f64::min);
    let mut hi = center
        .iter()
        .zip(&radius)
        .map(|(c, r)| c + r)
        .fold(f64::NEG_INFINITY, f64::max);
    lo -= 1.0;
    hi += 1.0;
    // Invariant: A - lo I is PD, A - hi I is not.
    while hi - lo > 1e-11 * (1.0 + hi.abs().min(lo.abs())) {
        let mid = 0.5 * (lo + hi);
        if is_positive_definite(a, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
