//! Steady cross-diffusion system with zero-order terms:
//! gamma_i u_i - div(g (a_i1 grad u_1 + a_i2 grad u_2)) = G_i,
//! natural boundary conditions.
//!
//! Solved by the same fixed-point lag as the evolution scheme, starting
//! from u_i = G_i / gamma_i (exact for constant data). After convergence
//! the a priori supremum bound
//!
//! ```text
//! gamma_1 (1-|alpha_21|) |u1|_inf + gamma_2 (1-|alpha_12|) |u2|_inf
//!     <= (1+|alpha_21|) |G1|_inf + (1+|alpha_12|) |G2|_inf
//! ```
//!
//! (alpha_ij = a_ij / a_jj) is evaluated on the discrete solution and
//! reported in the diagnostics; it is proven for the continuous problem, so
//! small discrete violations are recorded rather than fatal.

use crate::assemble::assemble_coupled_diag;
use crate::detector::EdgeDetector;
use crate::diffusion::DiffusionMatrix;
use crate::grid::{interpolate_to_quadrature, lumped_mass, Grid, NodalField};
use crate::scheme::{CdError, CdState};
use crate::solver::{solve_linear, SolverConfig};

/// Data of the steady problem: positive zero-order coefficients and bounded
/// sources.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProblem {
    pub gamma1: f64,
    pub gamma2: f64,
    pub source1: NodalField,
    pub source2: NodalField,
}

impl SteadyProblem {
    pub fn validate(&self, grid: &Grid) -> Result<(), CdError> {
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(CdError::InvalidConfig(format!("{name} must be positive, got {g}")));
            }
        }
        grid.check_field(&self.source1)?;
        grid.check_field(&self.source2)?;
        for v in self.source1.iter().chain(&self.source2) {
            if !v.is_finite() {
                return Err(CdError::InvalidConfig("source terms must be bounded".into()));
            }
        }
        Ok(())
    }
}

/// Convergence record and the supremum-bound check for a steady solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyDiagnostics {
    pub fp_iterations: usize,
    pub fp_residual: f64,
    pub converged: bool,
    /// Left side of the a priori bound evaluated on the discrete solution.
    pub linf_lhs: f64,
    /// Right side of the a priori bound from the sources.
    pub linf_rhs: f64,
    pub linf_bound_holds: bool,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Fixed-point solve of the steady system with the detector lagged on u2.
#[allow(clippy::too_many_arguments)]
pub fn solve_steady(
    prob: &SteadyProblem,
    a: &DiffusionMatrix,
    detector: &EdgeDetector,
    grid: &Grid,
    fp_tol: f64,
    max_fp_iter: usize,
    solver: &SolverConfig,
) -> Result<(CdState, SteadyDiagnostics), CdError> {
    a.check_hypothesis()?;
    prob.validate(grid)?;
    if !(fp_tol > 0.0) || max_fp_iter == 0 {
        return Err(CdError::InvalidConfig(
            "fp_tol must be positive and max_fp_iter at least 1".into(),
        ));
    }
    let n = grid.node_count();
    let mass = lumped_mass(grid);

    let mut rhs = vec![0.0; 2 * n];
    for p in 0..n {
        rhs[p] = mass[p] * prob.source1[p];
        rhs[n + p] = mass[p] * prob.source2[p];
    }

    let mut u1: Vec<f64> = prob.source1.iter().map(|v| v / prob.gamma1).collect();
    let mut u2: Vec<f64> = prob.source2.iter().map(|v| v / prob.gamma2).collect();

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_fp_iter {
        iterations += 1;
        let g = detector.evaluate_field(&interpolate_to_quadrature(grid, &u2)?);
        let system =
            assemble_coupled_diag(grid, &g, a.as_rows(), &mass, [prob.gamma1, prob.gamma2])?;
        let x = solve_linear(&system, &rhs, solver)?;
        let (x1, x2) = x.split_at(n);
        let d1 = u1
            .iter()
            .zip(x1)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let d2 = u2
            .iter()
            .zip(x2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        residual = d1.max(d2);
        u1.copy_from_slice(x1);
        u2.copy_from_slice(x2);
        if residual < fp_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CdError::FixedPointStalled {
            iterations,
            residual,
            tol: fp_tol,
        });
    }

    let alpha12 = a.alpha12().abs();
    let alpha21 = a.alpha21().abs();
    let linf_lhs = prob.gamma1 * (1.0 - alpha21) * sup_norm(&u1)
        + prob.gamma2 * (1.0 - alpha12) * sup_norm(&u2);
    let linf_rhs =
        (1.0 + alpha21) * sup_norm(&prob.source1) + (1.0 + alpha12) * sup_norm(&prob.source2);

    let diagnostics = SteadyDiagnostics {
        fp_iterations: iterations,
        fp_residual: residual,
        converged,
        linf_lhs,
        linf_rhs,
        linf_bound_holds: linf_lhs <= linf_rhs,
    };
    let mut state = CdState::new(u1, u2);
    state.fp_iterations_last = iterations;
    Ok((state, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_sources_solve_exactly() {
        let grid = build_grid(6, 6).unwrap();
        let n = grid.node_count();
        let prob = SteadyProblem {
            gamma1: 2.0,
            gamma2: 0.5,
            source1: vec![3.0; n],
            source2: vec![-1.0; n],
        };
        let a = DiffusionMatrix::rotation(PI / 30.0);
        let det = EdgeDetector::exponential(0.15).unwrap();
        let (state, diag) = solve_steady(
            &prob,
            &a,
            &det,
            &grid,
            1e-3,
            50,
            &SolverConfig::default(),
        )
        .unwrap();
        // constants kill the gradient terms, so u_i = G_i / gamma_i exactly
        for &v in &state.u1 {
            assert!((v - 1.5).abs() < 1e-8);
        }
        for &v in &state.u2 {
            assert!((v + 2.0).abs() < 1e-8);
        }
        assert!(diag.converged);
        assert!(diag.linf_bound_holds);
    }

    #[test]
    fn hypothesis_violation_detected() {
        let grid = build_grid(4, 4).unwrap();
        let n = grid.node_count();
        let prob = SteadyProblem {
            gamma1: 1.0,
            gamma2: 1.0,
            source1: vec![0.0; n],
            source2: vec![0.0; n],
        };
        let a = DiffusionMatrix::new(1.0, 2.0, 2.0, 1.0);
        let det = EdgeDetector::exponential(0.15).unwrap();
        assert!(matches!(
            solve_steady(&prob, &a, &det, &grid, 1e-3, 50, &SolverConfig::default()),
            Err(CdError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn random_bounded_sources_satisfy_sup_bound() {
        let grid = build_grid(12, 12).unwrap();
        let n = grid.node_count();
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let prob = SteadyProblem {
            gamma1: 1.0,
            gamma2: 1.0,
            source1: (0..n).map(|_| next()).collect(),
            source2: (0..n).map(|_| next()).collect(),
        };
        let a = DiffusionMatrix::rotation(PI / 30.0);
        let det = EdgeDetector::exponential(0.15).unwrap();
        let (_, diag) = solve_steady(
            &prob,
            &a,
            &det,
            &grid,
            1e-3,
            100,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(diag.converged);
        assert!(
            diag.linf_bound_holds,
            "lhs {} rhs {}",
            diag.linf_lhs,
            diag.linf_rhs
        );
    }
}
