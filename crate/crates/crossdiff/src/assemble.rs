//! Stiffness and system assembly on the uniform Q1 grid.
//!
//! The diffusion term uses 2x2 Gauss quadrature with a cellwise coefficient
//! field (the edge detector evaluated at the Gauss points); the time/fidelity
//! term is a lumped-mass diagonal. Neumann boundaries are natural: no
//! boundary terms are assembled. Assembly is serial and bit-reproducible:
//! cells are visited row-major and contributions accumulated in that order.

use crate::grid::{
    shape_gradients, FemError, Grid, QuadratureField, GAUSS_1D, GAUSS_WEIGHT,
};
use crate::sparse::SparseMatrix;

/// Precomputed w * grad(phi_p) . grad(phi_q) at each Gauss point.
fn gradient_products() -> [[[f64; 4]; 4]; 4] {
    let mut b = [[[0.0; 4]; 4]; 4];
    for (jy, &gy) in GAUSS_1D.iter().enumerate() {
        for (jx, &gx) in GAUSS_1D.iter().enumerate() {
            let g = shape_gradients(gx, gy);
            for p in 0..4 {
                for q in 0..4 {
                    b[2 * jy + jx][p][q] = GAUSS_WEIGHT * (g[p][0] * g[q][0] + g[p][1] * g[q][1]);
                }
            }
        }
    }
    b
}

fn check_coefficients(grid: &Grid, g: &QuadratureField) -> Result<(), FemError> {
    if !g.matches(grid) {
        return Err(FemError::BadDimensions(format!(
            "quadrature field is {}x{} cells, grid has {}x{}",
            g.cells_x,
            g.cells_y,
            grid.cells_x(),
            grid.cells_y()
        )));
    }
    for cell in &g.values {
        for &v in cell {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FemError::NonPositiveDetector { value: v });
            }
        }
    }
    Ok(())
}

/// N x N stiffness matrix K_g with K[p,q] = sum_cells sum_gp w g grad(phi_p).grad(phi_q).
pub fn assemble_scalar_stiffness(
    grid: &Grid,
    g: &QuadratureField,
) -> Result<SparseMatrix, FemError> {
    check_coefficients(grid, g)?;
    let n = grid.node_count();
    let nx = grid.nx();
    let ny = grid.ny();

    // 9-point stencil pattern, columns ascending because (dy, dx) ascend.
    let mut row_ptr = vec![0usize; n + 1];
    for iy in 0..ny {
        let span_y = if iy == 0 || iy + 1 == ny { 2 } else { 3 };
        for ix in 0..nx {
            let span_x = if ix == 0 || ix + 1 == nx { 2 } else { 3 };
            row_ptr[iy * nx + ix + 1] = span_x * span_y;
        }
    }
    for r in 0..n {
        row_ptr[r + 1] += row_ptr[r];
    }
    let nnz = row_ptr[n];
    let mut col_idx = vec![0usize; nnz];
    let mut values = vec![0.0f64; nnz];
    for iy in 0..ny {
        for ix in 0..nx {
            let mut k = row_ptr[iy * nx + ix];
            for dy in -1i64..=1 {
                let jy = iy as i64 + dy;
                if jy < 0 || jy >= ny as i64 {
                    continue;
                }
                for dx in -1i64..=1 {
                    let jx = ix as i64 + dx;
                    if jx < 0 || jx >= nx as i64 {
                        continue;
                    }
                    col_idx[k] = jy as usize * nx + jx as usize;
                    k += 1;
                }
            }
        }
    }

    let b = gradient_products();
    for cy in 0..grid.cells_y() {
        for cx in 0..grid.cells_x() {
            let gq = &g.values[cy * grid.cells_x() + cx];
            let mut local = [[0.0f64; 4]; 4];
            for gp in 0..4 {
                let w = gq[gp];
                for p in 0..4 {
                    for q in 0..4 {
                        local[p][q] += w * b[gp][p][q];
                    }
                }
            }
            let nodes = grid.cell_nodes(cx, cy);
            for p in 0..4 {
                let row = nodes[p];
                let cols = &col_idx[row_ptr[row]..row_ptr[row + 1]];
                let vals = &mut values[row_ptr[row]..row_ptr[row + 1]];
                for q in 0..4 {
                    // at most 9 columns per row, linear scan is fine
                    let pos = cols.iter().position(|&c| c == nodes[q]).expect("stencil");
                    vals[pos] += local[p][q];
                }
            }
        }
    }
    Ok(SparseMatrix::from_raw(n, n, row_ptr, col_idx, values))
}

/// Scalar system (diag_coeff * diag(mass)) + K_g for the single-component
/// semi-implicit schemes.
pub fn assemble_scalar_system(
    grid: &Grid,
    g: &QuadratureField,
    mass: &[f64],
    diag_coeff: f64,
) -> Result<SparseMatrix, FemError> {
    grid.check_field(mass)?;
    let mut k = assemble_scalar_stiffness(grid, g)?;
    add_to_diagonal(&mut k, |n| diag_coeff * mass[n]);
    Ok(k)
}

fn add_to_diagonal(m: &mut SparseMatrix, f: impl Fn(usize) -> f64) {
    // rebuilt through from_raw to keep fields private to sparse.rs
    let n = m.nrows();
    let mut trip = Vec::with_capacity(n);
    for r in 0..n {
        trip.push((r, r, f(r)));
    }
    let diag = SparseMatrix::from_triplets(n, n, &trip).expect("diagonal triplets");
    *m = add_sparse(m, &diag);
}

/// Structural sum of two CSR matrices (same shape).
fn add_sparse(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let n = a.nrows();
    let mut row_ptr = vec![0usize; n + 1];
    let mut col_idx = Vec::with_capacity(a.nnz() + b.nnz());
    let mut values = Vec::with_capacity(a.nnz() + b.nnz());
    for r in 0..n {
        let (ca, va) = a.row(r);
        let (cb, vb) = b.row(r);
        let (mut i, mut j) = (0, 0);
        while i < ca.len() || j < cb.len() {
            if j >= cb.len() || (i < ca.len() && ca[i] < cb[j]) {
                col_idx.push(ca[i]);
                values.push(va[i]);
                i += 1;
            } else if i >= ca.len() || cb[j] < ca[i] {
                col_idx.push(cb[j]);
                values.push(vb[j]);
                j += 1;
            } else {
                col_idx.push(ca[i]);
                values.push(va[i] + vb[j]);
                i += 1;
                j += 1;
            }
        }
        row_ptr[r + 1] = col_idx.len();
    }
    SparseMatrix::from_raw(n, a.ncols(), row_ptr, col_idx, values)
}

/// Coupled 2N x 2N system with blocks
/// `(1/tau + beta_i) diag(mass) delta_ij + a_ij K_g`,
/// unknowns ordered component-major (all u1 nodes, then all u2 nodes).
pub fn assemble_coupled(
    grid: &Grid,
    g: &QuadratureField,
    a: [[f64; 2]; 2],
    mass: &[f64],
    tau: f64,
    beta: [f64; 2],
) -> Result<SparseMatrix, FemError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(FemError::BadDimensions(format!("tau must be positive, got {tau}")));
    }
    for b in beta {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(FemError::BadDimensions(format!("beta must be >= 0, got {b}")));
        }
    }
    assemble_coupled_diag(grid, g, a, mass, [1.0 / tau + beta[0], 1.0 / tau + beta[1]])
}

/// Coupled system with arbitrary per-component diagonal coefficients
/// `diag_i * diag(mass) delta_ij + a_ij K_g` (steady problems use gamma_i).
pub fn assemble_coupled_diag(
    grid: &Grid,
    g: &QuadratureField,
    a: [[f64; 2]; 2],
    mass: &[f64],
    diag: [f64; 2],
) -> Result<SparseMatrix, FemError> {
    grid.check_field(mass)?;
    for row in &a {
        for &v in row {
            if !v.is_finite() {
                return Err(FemError::BadDimensions(format!(
                    "diffusion matrix entry {v} is not finite"
                )));
            }
        }
    }
    let k = assemble_scalar_stiffness(grid, g)?;
    let n = grid.node_count();

    let mut row_ptr = vec![0usize; 2 * n + 1];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    for i in 0..2 {
        for node in 0..n {
            let (kc, kv) = k.row(node);
            // block columns in j order keep global columns ascending
            for j in 0..2 {
                let offset = j * n;
                if a[i][j] != 0.0 {
                    for (c, v) in kc.iter().zip(kv) {
                        let mut entry = a[i][j] * v;
                        if i == j && *c == node {
                            entry += diag[i] * mass[node];
                        }
                        col_idx.push(offset + c);
                        values.push(entry);
                    }
                } else if i == j {
                    col_idx.push(offset + node);
                    values.push(diag[i] * mass[node]);
                }
            }
            row_ptr[i * n + node + 1] = col_idx.len();
        }
    }
    Ok(SparseMatrix::from_raw(2 * n, 2 * n, row_ptr, col_idx, values))
}
