//! Sparse linear solves: BiCGStab with Jacobi preconditioning, and a dense
//! LU factorization used as the direct method and as fallback for small
//! systems when the Krylov iteration stalls.
//!
//! The coupled cross-diffusion system is nonsymmetric whenever the rotation
//! angle is nonzero, which rules out plain CG.

use crate::sparse::SparseMatrix;
use thiserror::Error;

/// Systems up to this size may always be solved (or re-solved) densely.
const DENSE_FALLBACK_LIMIT: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("matrix is {nrows}x{ncols} but rhs has length {rhs}")]
    DimensionMismatch {
        nrows: usize,
        ncols: usize,
        rhs: usize,
    },
    #[error("iterative solver did not reach tolerance after {iterations} iterations")]
    SolverDiverged { iterations: usize },
    #[error("matrix is singular to working precision")]
    SingularMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Dense LU with partial pivoting.
    DirectDense,
    /// Jacobi-preconditioned BiCGStab with dense fallback on stall.
    #[default]
    BiCgStab,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Relative residual target: |Mx - b| <= rel_tol * |b|.
    pub rel_tol: f64,
    /// Iteration cap; defaults to 10 * N when unset.
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::BiCgStab,
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

impl SolverConfig {
    pub fn direct() -> Self {
        Self {
            method: SolverMethod::DirectDense,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves M x = rhs to `|Mx - rhs| <= rel_tol * |rhs|`.
pub fn solve_linear(
    m: &SparseMatrix,
    rhs: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>, SolverError> {
    if m.nrows() != m.ncols() || rhs.len() != m.nrows() {
        return Err(SolverError::DimensionMismatch {
            nrows: m.nrows(),
            ncols: m.ncols(),
            rhs: rhs.len(),
        });
    }
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok(vec![0.0; m.nrows()]);
    }
    match cfg.method {
        SolverMethod::DirectDense => dense_solve(m, rhs),
        SolverMethod::BiCgStab => {
            let max_iter = cfg.max_iter.unwrap_or(10 * m.nrows());
            match bicgstab(m, rhs, cfg.rel_tol, max_iter) {
                Ok(x) => Ok(x),
                Err(e) if m.nrows() <= DENSE_FALLBACK_LIMIT => {
                    dense_solve(m, rhs).map_err(|_| e)
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// Dense LU with partial pivoting plus one step of iterative refinement
/// against the original sparse matrix.
fn dense_solve(m: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = m.nrows();
    let mut lu = m.to_dense();
    let mut piv: Vec<usize> = (0..n).collect();

    let scale = lu.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 {
        return Err(SolverError::SingularMatrix);
    }
    let piv_tol = scale * f64::EPSILON * n as f64;

    for col in 0..n {
        let mut best = col;
        let mut best_abs = lu[piv[col] * n + col].abs();
        for row in col + 1..n {
            let a = lu[piv[row] * n + col].abs();
            if a > best_abs {
                best = row;
                best_abs = a;
            }
        }
        if best_abs <= piv_tol {
            return Err(SolverError::SingularMatrix);
        }
        piv.swap(col, best);
        let prow = piv[col];
        let pivot = lu[prow * n + col];
        for row in col + 1..n {
            let r = piv[row];
            let factor = lu[r * n + col] / pivot;
            lu[r * n + col] = factor;
            if factor != 0.0 {
                for k in col + 1..n {
                    lu[r * n + k] -= factor * lu[prow * n + k];
                }
            }
        }
    }

    let lu_apply = |b: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for row in 0..n {
            let mut acc = b[piv[row]];
            for col in 0..row {
                acc -= lu[piv[row] * n + col] * y[col];
            }
            y[row] = acc;
        }
        for row in (0..n).rev() {
            let mut acc = y[row];
            for col in row + 1..n {
                acc -= lu[piv[row] * n + col] * y[col];
            }
            y[row] = acc / lu[piv[row] * n + row];
        }
        y
    };

    let mut x = lu_apply(rhs);
    // one refinement pass keeps the residual near machine rounding
    let mut residual = vec![0.0; n];
    m.matvec(&x, &mut residual);
    for i in 0..n {
        residual[i] = rhs[i] - residual[i];
    }
    let dx = lu_apply(&residual);
    for i in 0..n {
        x[i] += dx[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::SingularMatrix);
    }
    Ok(x)
}

/// Jacobi-preconditioned BiCGStab (van der Vorst), with soft restarts on
/// rho breakdown and a true-residual check before returning.
fn bicgstab(
    m: &SparseMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, SolverError> {
    let n = m.nrows();
    let b_norm = norm2(b);
    let target = rel_tol * b_norm;

    let inv_diag: Vec<f64> = m
        .diagonal()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> {
        v.iter().zip(&inv_diag).map(|(x, d)| x * d).collect()
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut t = vec![0.0; n];

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            // r became orthogonal to the shadow residual: soft restart
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.fill(0.0);
            p.fill(0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precond(&p);
        m.matvec(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.fill(0.0);
            p.fill(0.0);
            continue;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm2(&s) <= target {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            if true_residual_ok(m, b, &x, target) {
                return Ok(x);
            }
            r = compute_residual(m, b, &x);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.fill(0.0);
            p.fill(0.0);
            continue;
        }
        let s_hat = precond(&s);
        m.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(SolverError::SolverDiverged { iterations });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        if norm2(&r) <= target {
            if true_residual_ok(m, b, &x, target) {
                return Ok(x);
            }
            r = compute_residual(m, b, &x);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.fill(0.0);
            p.fill(0.0);
        }
        if omega == 0.0 {
            return Err(SolverError::SolverDiverged { iterations });
        }
    }
    Err(SolverError::SolverDiverged { iterations })
}

fn compute_residual(m: &SparseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    m.matvec(x, &mut r);
    for i in 0..b.len() {
        r[i] = b[i] - r[i];
    }
    r
}

fn true_residual_ok(m: &SparseMatrix, b: &[f64], x: &[f64], target: f64) -> bool {
    norm2(&compute_residual(m, b, x)) <= target
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> SparseMatrix {
        let trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
        SparseMatrix::from_triplets(n, n, &trip).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let m = identity(5);
        let rhs = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        for cfg in [SolverConfig::default(), SolverConfig::direct()] {
            let x = solve_linear(&m, &rhs, &cfg).unwrap();
            for (a, b) in x.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_matrix_is_singular() {
        let m = SparseMatrix::from_triplets(3, 3, &[]).unwrap();
        let rhs = vec![1.0, 1.0, 1.0];
        assert_eq!(
            solve_linear(&m, &rhs, &SolverConfig::direct()),
            Err(SolverError::SingularMatrix)
        );
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let m = identity(4);
        let x = solve_linear(&m, &[0.0; 4], &SolverConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let m = identity(3);
        assert!(matches!(
            solve_linear(&m, &[1.0; 4], &SolverConfig::default()),
            Err(SolverError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn residual_contract_on_nonsymmetric_system() {
        // diagonally dominant nonsymmetric band matrix
        let n = 200;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 4.0 + (i % 3) as f64));
            if i + 1 < n {
                trip.push((i, i + 1, -1.3));
                trip.push((i + 1, i, 0.7));
            }
        }
        let m = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let cfg = SolverConfig::default();
        let x = solve_linear(&m, &rhs, &cfg).unwrap();
        let r = compute_residual(&m, &rhs, &x);
        assert!(norm2(&r) <= cfg.rel_tol * norm2(&rhs) * (1.0 + 1e-12));
    }
}
