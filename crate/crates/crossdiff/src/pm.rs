//! The two Perona-Malik baselines.
//!
//! The gradient-based variant reuses the FEM/fixed-point machinery of the
//! cross-diffusion scheme with a scalar unknown and the detector driven by
//! |grad u| at the quadrature points. The Laplacian-based variant is an
//! explicit finite-difference scheme on the pixel lattice with mirror
//! (zero-flux) boundaries, the detector driven by the 5-point |Laplacian|
//! at nodes averaged onto faces.

use crate::assemble::assemble_scalar_system;
use crate::detector::EdgeDetector;
use crate::grid::{build_grid, gradient_magnitude_at_quadrature, lumped_mass, FemError};
use crate::image::Image;
use crate::scheme::{lumped_energy, lumped_total, StepDiagnostics};
use crate::solver::{solve_linear, SolverConfig, SolverError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("image must be at least {min}x{min} for this scheme, got {width}x{height}")]
    TooSmall {
        min: usize,
        width: usize,
        height: usize,
    },
    #[error("unstable time step: tau * max(g) = {0} exceeds 1/4")]
    UnstableTimeStep(f64),
    #[error("fixed point stalled after {iterations} iterations (residual {residual:e})")]
    FixedPointStalled { iterations: usize, residual: f64 },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Parameters shared by both Perona-Malik schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct PmConfig {
    pub detector: EdgeDetector,
    pub tau: f64,
    pub t_final: f64,
    pub fp_tol: f64,
    pub max_fp_iter: usize,
    pub abort_on_stall: bool,
    pub solver: SolverConfig,
}

impl Default for PmConfig {
    fn default() -> Self {
        Self {
            detector: EdgeDetector::Exponential { lambda: 20.0 },
            tau: 0.01,
            t_final: 0.3,
            fp_tol: 1e-3,
            max_fp_iter: 50,
            abort_on_stall: false,
            solver: SolverConfig::default(),
        }
    }
}

impl PmConfig {
    fn validate(&self) -> Result<(), PmError> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(PmError::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(PmError::InvalidConfig(format!(
                "t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.t_final > 0.0 && self.tau > self.t_final {
            return Err(PmError::InvalidConfig(format!(
                "tau = {} exceeds t_final = {}",
                self.tau, self.t_final
            )));
        }
        if !(self.fp_tol > 0.0) || self.max_fp_iter == 0 {
            return Err(PmError::InvalidConfig(
                "fp_tol must be positive and max_fp_iter at least 1".into(),
            ));
        }
        Ok(())
    }

    fn step_count(&self) -> usize {
        ((self.t_final / self.tau) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Denoised image plus the same per-step diagnostics as the coupled scheme
/// (energy is the lumped norm of the single component; the FD scheme reports
/// plain sums).
#[derive(Debug, Clone)]
pub struct PmRun {
    pub denoised: Image,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Semi-implicit FEM scheme with g = g(|grad u|), fixed-point lagged.
pub fn denoise_pm_grad(noisy: &Image, cfg: &PmConfig) -> Result<PmRun, PmError> {
    cfg.validate()?;
    let grid = build_grid(noisy.width(), noisy.height())?;
    let mass = lumped_mass(&grid);
    let n = grid.node_count();
    let mut u: Vec<f64> = noisy.pixels().to_vec();
    let mass_scale = mass
        .iter()
        .zip(&u)
        .map(|(m, v)| m * v.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let zero = vec![0.0; n];

    let steps = cfg.step_count();
    let mut diagnostics = Vec::with_capacity(steps);
    for step in 1..=steps {
        let mass_before = lumped_total(&mass, &u);
        let rhs: Vec<f64> = u.iter().zip(&mass).map(|(v, m)| m * v / cfg.tau).collect();
        let mut prev = u.clone();
        let mut fp_iters = 0;
        let mut residual;
        let mut stalled = false;
        loop {
            fp_iters += 1;
            let grad = gradient_magnitude_at_quadrature(&grid, &prev)?;
            let g = cfg.detector.evaluate_field(&grad);
            let system = assemble_scalar_system(&grid, &g, &mass, 1.0 / cfg.tau)?;
            let x = solve_linear(&system, &rhs, &cfg.solver)?;
            residual = prev
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            prev = x;
            if residual < cfg.fp_tol {
                break;
            }
            if fp_iters >= cfg.max_fp_iter {
                stalled = true;
                break;
            }
        }
        if stalled && cfg.abort_on_stall {
            return Err(PmError::FixedPointStalled {
                iterations: fp_iters,
                residual,
            });
        }
        u = prev;
        diagnostics.push(StepDiagnostics {
            step,
            fp_iters,
            fp_residual: residual,
            mass_drift: (lumped_total(&mass, &u) - mass_before).abs() / mass_scale,
            energy: lumped_energy(&mass, &u, &zero),
        });
    }
    Ok(PmRun {
        denoised: Image::new(noisy.width(), noisy.height(), u)
            .map_err(|e| PmError::InvalidConfig(format!("solution not finite: {e}")))?,
        diagnostics,
    })
}

/// Explicit finite-difference scheme with g = g(|Delta u|).
///
/// Per step: the 5-point Laplacian with mirror boundary feeds the detector
/// at nodes, face diffusivities are arithmetic means of the adjacent nodal
/// values, and the update is the conservative flux form
/// `u += tau * div(g_face grad u)`. Requires `tau * max(g) <= 1/4`, which
/// also yields a discrete maximum principle.
pub fn denoise_pm_lap(noisy: &Image, cfg: &PmConfig) -> Result<PmRun, PmError> {
    cfg.validate()?;
    let (w, h) = (noisy.width(), noisy.height());
    if w < 3 || h < 3 {
        return Err(PmError::TooSmall {
            min: 3,
            width: w,
            height: h,
        });
    }
    // stability is determined by the detector's largest possible value
    let stability = cfg.tau * cfg.detector.max_value();
    if stability > 0.25 + 1e-12 {
        return Err(PmError::UnstableTimeStep(stability));
    }

    let mut u: Vec<f64> = noisy.pixels().to_vec();
    let total_scale = u.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let idx = |x: usize, y: usize| y * w + x;
    // zero-flux ghost cells: border neighbors clamp to the edge pixel, so
    // boundary face fluxes vanish and mass telescopes exactly
    let left = |x: usize| x.saturating_sub(1);
    let right = |x: usize| (x + 1).min(w - 1);
    let up = |y: usize| y.saturating_sub(1);
    let down = |y: usize| (y + 1).min(h - 1);

    let steps = cfg.step_count();
    let mut diagnostics = Vec::with_capacity(steps);
    let mut g = vec![0.0; u.len()];
    let mut next = vec![0.0; u.len()];
    for step in 1..=steps {
        let mass_before: f64 = u.iter().sum();
        for y in 0..h {
            for x in 0..w {
                let lap = u[idx(left(x), y)] + u[idx(right(x), y)] + u[idx(x, up(y))]
                    + u[idx(x, down(y))]
                    - 4.0 * u[idx(x, y)];
                g[idx(x, y)] = cfg.detector.evaluate(lap.abs());
            }
        }
        for y in 0..h {
            for x in 0..w {
                let c = idx(x, y);
                let (e, wst, s, nth) = (idx(right(x), y), idx(left(x), y), idx(x, down(y)), idx(x, up(y)));
                let flux = 0.5 * (g[c] + g[e]) * (u[e] - u[c])
                    + 0.5 * (g[c] + g[wst]) * (u[wst] - u[c])
                    + 0.5 * (g[c] + g[s]) * (u[s] - u[c])
                    + 0.5 * (g[c] + g[nth]) * (u[nth] - u[c]);
                next[c] = u[c] + cfg.tau * flux;
            }
        }
        std::mem::swap(&mut u, &mut next);
        let mass_after: f64 = u.iter().sum();
        diagnostics.push(StepDiagnostics {
            step,
            fp_iters: 1,
            fp_residual: 0.0,
            mass_drift: (mass_after - mass_before).abs() / total_scale,
            energy: u.iter().map(|v| v * v).sum(),
        });
    }
    Ok(PmRun {
        denoised: Image::new(w, h, u)
            .map_err(|e| PmError::InvalidConfig(format!("solution not finite: {e}")))?,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_images_are_fixed_points() {
        let img = Image::constant(8, 8, 99.0).unwrap();
        let cfg = PmConfig {
            t_final: 0.05,
            ..PmConfig::default()
        };
        let grad = denoise_pm_grad(&img, &cfg).unwrap();
        for &p in grad.denoised.pixels() {
            assert!((p - 99.0).abs() < 1e-8);
        }
        let lap = denoise_pm_lap(&img, &cfg).unwrap();
        for &p in lap.denoised.pixels() {
            assert_eq!(p, 99.0);
        }
    }

    #[test]
    fn impulse_heat_step_matches_stencil() {
        // g = 1: one explicit step is the discrete heat update.
        let mut pixels = vec![0.0; 25];
        pixels[12] = 10.0;
        let img = Image::new(5, 5, pixels).unwrap();
        let cfg = PmConfig {
            detector: EdgeDetector::Constant { value: 1.0 },
            tau: 0.1,
            t_final: 0.1,
            ..PmConfig::default()
        };
        let out = denoise_pm_lap(&img, &cfg).unwrap().denoised;
        assert!((out.get(2, 2) - (10.0 - 4.0 * 0.1 * 10.0)).abs() < 1e-12);
        for (x, y) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            assert!((out.get(x, y) - 0.1 * 10.0).abs() < 1e-12);
        }
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn explicit_scheme_conserves_mass() {
        let img = Image::from_fn(16, 12, |x, y| ((x * 17 + y * 29) % 251) as f64).unwrap();
        let cfg = PmConfig {
            detector: EdgeDetector::Exponential { lambda: 10.0 },
            tau: 0.2,
            t_final: 4.0,
            ..PmConfig::default()
        };
        let run = denoise_pm_lap(&img, &cfg).unwrap();
        for d in &run.diagnostics {
            assert!(d.mass_drift <= 1e-10, "step {} drift {}", d.step, d.mass_drift);
        }
    }

    #[test]
    fn fem_scheme_conserves_mass() {
        let img = Image::from_fn(12, 12, |x, y| ((x * 31 + y * 7) % 200) as f64).unwrap();
        let cfg = PmConfig {
            t_final: 0.05,
            ..PmConfig::default()
        };
        let run = denoise_pm_grad(&img, &cfg).unwrap();
        for d in &run.diagnostics {
            assert!(d.mass_drift <= 1e-8, "step {} drift {}", d.step, d.mass_drift);
        }
    }

    #[test]
    fn shift_invariance_of_both_schemes() {
        let img = Image::from_fn(10, 10, |x, y| ((x * 13 + y * 41) % 128) as f64).unwrap();
        let shifted = img.map(|p| p + 50.0).unwrap();
        let cfg = PmConfig {
            detector: EdgeDetector::Exponential { lambda: 15.0 },
            t_final: 0.05,
            solver: SolverConfig::direct(),
            ..PmConfig::default()
        };
        let a = denoise_pm_grad(&img, &cfg).unwrap().denoised;
        let b = denoise_pm_grad(&shifted, &cfg).unwrap().denoised;
        for (x, y) in a.pixels().iter().zip(b.pixels()) {
            assert!((x + 50.0 - y).abs() < 1e-10);
        }
        let cfg_lap = PmConfig {
            tau: 0.2,
            t_final: 2.0,
            ..cfg
        };
        let a = denoise_pm_lap(&img, &cfg_lap).unwrap().denoised;
        let b = denoise_pm_lap(&shifted, &cfg_lap).unwrap().denoised;
        for (x, y) in a.pixels().iter().zip(b.pixels()) {
            assert!((x + 50.0 - y).abs() < 1e-10);
        }
    }

    #[test]
    fn unstable_time_step_rejected() {
        let img = Image::constant(5, 5, 1.0).unwrap();
        let cfg = PmConfig {
            detector: EdgeDetector::Constant { value: 1.0 },
            tau: 0.3,
            t_final: 0.3,
            ..PmConfig::default()
        };
        assert!(matches!(
            denoise_pm_lap(&img, &cfg),
            Err(PmError::UnstableTimeStep(_))
        ));
    }

    #[test]
    fn maximum_principle_short_run() {
        let img = Image::from_fn(12, 12, |x, y| ((x * 97 + y * 53) % 256) as f64).unwrap();
        let (lo, hi) = (img.min(), img.max());
        let cfg = PmConfig {
            detector: EdgeDetector::Rational { lambda: 10.0 },
            tau: 0.25,
            t_final: 5.0,
            ..PmConfig::default()
        };
        let out = denoise_pm_lap(&img, &cfg).unwrap().denoised;
        for &p in out.pixels() {
            assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }

    #[test]
    fn too_small_for_laplacian_stencil() {
        let img = Image::constant(2, 5, 1.0).unwrap();
        assert!(matches!(
            denoise_pm_lap(&img, &PmConfig::default()),
            Err(PmError::TooSmall { .. })
        ));
    }
}
