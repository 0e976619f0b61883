//! Solver and assembly checks against an independent dense elimination
//! oracle.

use crossdiff::assemble::assemble_coupled;
use crossdiff::grid::{build_grid, interpolate_to_quadrature, lumped_mass};
use crossdiff::solver::{solve_linear, SolverConfig, SolverError};
use crossdiff::sparse::SparseMatrix;

/// Plain Gaussian elimination with partial pivoting on a dense copy;
/// written from scratch so it shares nothing with the library solver.
fn dense_oracle_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        assert!(a[col][col].abs() > 0.0, "oracle hit a zero pivot");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for col in row + 1..n {
            acc -= a[row][col] * x[col];
        }
        x[row] = acc / a[row][row];
    }
    x
}

fn to_dense_rows(m: &SparseMatrix) -> Vec<Vec<f64>> {
    let flat = m.to_dense();
    flat.chunks(m.ncols()).map(|r| r.to_vec()).collect()
}

fn rel_l2_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
}

/// The 72-unknown coupled system on a 6x6 grid: BiCGStab against the dense
/// oracle.
#[test]
fn coupled_72_unknown_solve_matches_dense_oracle() {
    let grid = build_grid(6, 6).unwrap();
    let n = grid.node_count();
    assert_eq!(2 * n, 72);
    let mut seed = 7u64;
    let field: Vec<f64> = (0..n).map(|_| splitmix(&mut seed) * 3.0).collect();
    let g = interpolate_to_quadrature(&grid, &field)
        .unwrap()
        .map(|v| (-(v * v) / 4.0).exp().max(1e-30));
    let mass = lumped_mass(&grid);
    let theta: f64 = std::f64::consts::PI / 30.0;
    let a = [
        [theta.cos(), -theta.sin()],
        [theta.sin(), theta.cos()],
    ];
    let system = assemble_coupled(&grid, &g, a, &mass, 0.01, [0.3, 0.0]).unwrap();
    let rhs: Vec<f64> = (0..2 * n).map(|_| splitmix(&mut seed) * 2.0 - 1.0).collect();

    let x = solve_linear(&system, &rhs, &SolverConfig::default()).unwrap();
    let oracle = dense_oracle_solve(&to_dense_rows(&system), &rhs);
    let diff = rel_l2_diff(&x, &oracle);
    assert!(diff <= 1e-8, "relative difference {diff}");
}

#[test]
fn direct_path_matches_dense_oracle() {
    let grid = build_grid(5, 4).unwrap();
    let n = grid.node_count();
    let mut seed = 21u64;
    let field: Vec<f64> = (0..n).map(|_| splitmix(&mut seed)).collect();
    let g = interpolate_to_quadrature(&grid, &field)
        .unwrap()
        .map(|v| 1.0 / (1.0 + v * v));
    let mass = lumped_mass(&grid);
    let a = [[0.95, -0.2], [0.2, 0.95]];
    let system = assemble_coupled(&grid, &g, a, &mass, 0.05, [0.0, 0.0]).unwrap();
    let rhs: Vec<f64> = (0..2 * n).map(|_| splitmix(&mut seed) - 0.5).collect();

    let x = solve_linear(&system, &rhs, &SolverConfig::direct()).unwrap();
    let oracle = dense_oracle_solve(&to_dense_rows(&system), &rhs);
    assert!(rel_l2_diff(&x, &oracle) <= 1e-10);
}

/// The residual contract must hold on every successful return.
#[test]
fn residual_contract_on_assembled_systems() {
    let grid = build_grid(9, 7).unwrap();
    let n = grid.node_count();
    let mut seed = 5u64;
    for trial in 0..5 {
        let field: Vec<f64> = (0..n).map(|_| splitmix(&mut seed) * 5.0).collect();
        let g = interpolate_to_quadrature(&grid, &field)
            .unwrap()
            .map(|v| (-(v * v) / 9.0).exp().max(1e-30));
        let mass = lumped_mass(&grid);
        let a = [[1.0, -0.4], [0.4, 1.0]];
        let system = assemble_coupled(&grid, &g, a, &mass, 0.01, [0.0, 0.0]).unwrap();
        let rhs: Vec<f64> = (0..2 * n).map(|_| splitmix(&mut seed) * 10.0 - 5.0).collect();
        let cfg = SolverConfig::default();
        let x = solve_linear(&system, &rhs, &cfg).unwrap();
        let mut residual = vec![0.0; 2 * n];
        system.matvec(&x, &mut residual);
        let r_norm: f64 = residual
            .iter()
            .zip(&rhs)
            .map(|(mx, b)| (b - mx) * (b - mx))
            .sum::<f64>()
            .sqrt();
        let b_norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(
            r_norm <= cfg.rel_tol * b_norm * (1.0 + 1e-12),
            "trial {trial}: residual {r_norm} vs target {}",
            cfg.rel_tol * b_norm
        );
    }
}

/// Iterative path falls back to the dense factorization when it cannot
/// converge (here: an indefinite permutation-like system BiCGStab struggles
/// with under a tiny iteration cap).
#[test]
fn small_stalled_systems_fall_back_to_dense() {
    // skew-circulant system, strongly non-normal
    let n = 64;
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, (i + 1) % n, 1.0));
        trip.push((i, i, 0.1));
    }
    let m = SparseMatrix::from_triplets(n, n, &trip).unwrap();
    let rhs: Vec<f64> = (0..n).map(|i| ((i % 5) as f64) - 2.0).collect();
    let cfg = SolverConfig {
        max_iter: Some(2),
        ..SolverConfig::default()
    };
    let x = solve_linear(&m, &rhs, &cfg).unwrap();
    let mut ax = vec![0.0; n];
    m.matvec(&x, &mut ax);
    let r_norm: f64 = ax
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let b_norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r_norm <= 1e-10 * b_norm);
}

/// Oversized systems propagate the divergence error instead of falling back.
#[test]
fn large_stalled_systems_report_divergence() {
    let n = 5000; // above the dense fallback limit
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, (i + 1) % n, 1.0));
        trip.push((i, i, 1e-3));
    }
    let m = SparseMatrix::from_triplets(n, n, &trip).unwrap();
    let mut seed = 99u64;
    let rhs: Vec<f64> = (0..n).map(|_| splitmix(&mut seed) * 2.0 - 1.0).collect();
    let cfg = SolverConfig {
        max_iter: Some(3),
        ..SolverConfig::default()
    };
    assert!(matches!(
        solve_linear(&m, &rhs, &cfg),
        Err(SolverError::SolverDiverged { .. })
    ));
}

#[test]
fn matrix_market_dump_of_assembled_system_parses_back() {
    let grid = build_grid(3, 3).unwrap();
    let g = crossdiff::grid::QuadratureField::constant(&grid, 1.0);
    let mass = lumped_mass(&grid);
    let system =
        assemble_coupled(&grid, &g, [[1.0, 0.0], [0.0, 1.0]], &mass, 1.0, [0.0, 0.0]).unwrap();
    let text = system.to_matrix_market();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "%%MatrixMarket matrix coordinate real general"
    );
    let dims: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(dims[0], 18);
    assert_eq!(dims[1], 18);
    assert_eq!(dims[2], system.nnz());
    // round-trip every entry at 17 significant digits
    for line in lines {
        let mut it = line.split_whitespace();
        let r: usize = it.next().unwrap().parse::<usize>().unwrap() - 1;
        let c: usize = it.next().unwrap().parse::<usize>().unwrap() - 1;
        let v: f64 = it.next().unwrap().parse().unwrap();
        assert_eq!(v, system.get(r, c), "entry ({r},{c})");
    }
}
