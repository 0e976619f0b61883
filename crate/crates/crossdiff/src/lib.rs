//! Grayscale image denoising built around a cross-diffusion PDE system.
//!
//! The core is a coupled two-component diffusion model solved with a
//! quasi-steady-state semi-implicit scheme: each time step assembles a Q1
//! finite-element system whose diffusivity is throttled by an edge detector
//! evaluated on the second component, linearized by a fixed-point lag. The
//! first component is the evolving image, the second behaves like a
//! regularized Laplacian of the first and drives the detector.
//!
//! Reference filters (gradient and Laplacian Perona-Malik, Yaroslavsky,
//! patch-wise nonlocal means), a Gaussian noise model at prescribed SNR, and
//! PSNR/NCC/SSIM quality metrics round out the toolkit so the methods can be
//! benchmarked against each other on the same footing.

pub mod assemble;
pub mod bilateral;
pub mod config;
pub mod detector;
pub mod diffusion;
pub mod grid;
pub mod image;
pub mod metrics;
pub mod nlm;
pub mod noise;
pub mod pgm;
pub mod pm;
pub mod scheme;
pub mod solver;
pub mod sparse;
pub mod steady;
pub mod synth;

pub use bilateral::{yaroslavsky, YaroslavskyConfig};
pub use detector::EdgeDetector;
pub use diffusion::{check_hypothesis, DiffusionMatrix, HypothesisError};
pub use grid::{build_grid, Grid, NodalField};
pub use image::Image;
pub use metrics::{ncc, psnr, quality_report, ssim, QualityReport};
pub use nlm::{nlm, NlmConfig};
pub use noise::{add_gaussian_noise, snr, NoiseSpec};
pub use pgm::{load_pgm, save_pgm};
pub use pm::{denoise_pm_grad, denoise_pm_lap, PmConfig};
pub use scheme::{denoise_cd, qss_step, small_time_consistency, CdConfig, CdState};
pub use solver::{solve_linear, SolverConfig, SolverMethod};
pub use sparse::SparseMatrix;
pub use steady::{solve_steady, SteadyProblem};
pub use synth::{generate_synthetic, SyntheticKind};
