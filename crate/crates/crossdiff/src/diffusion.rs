//! Constant 2x2 diffusion matrix and its well-posedness conditions.
//!
//! The conditions: the symmetric part of A is positive definite (smallest
//! eigenvalue a0 > 0) and each diagonal entry dominates the opposite
//! off-diagonal entry, a_ii > |a_ji|. A rotation matrix satisfies both
//! exactly when the angle is below pi/4.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HypothesisError {
    #[error("diffusion matrix entry is not finite")]
    NonFinite,
    #[error("symmetric part is not positive definite (min eigenvalue {a0})")]
    NotPositiveDefinite { a0: f64 },
    #[error("dominance violated: a{i}{i} = {aii} is not greater than |a{j}{i}| = {aji_abs}")]
    DominanceViolated {
        i: usize,
        j: usize,
        aii: f64,
        aji_abs: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl DiffusionMatrix {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    /// [[cos t, -sin t], [sin t, cos t]].
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, -s, s, c)
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn as_rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    /// Ratios a_ij / a_jj entering the steady-state L-infinity bound.
    pub fn alpha12(&self) -> f64 {
        self.a12 / self.a22
    }

    pub fn alpha21(&self) -> f64 {
        self.a21 / self.a11
    }

    pub fn check_hypothesis(&self) -> Result<f64, HypothesisError> {
        check_hypothesis(self)
    }
}

/// Validates the well-posedness conditions and returns a0, the smallest
/// eigenvalue of (A + A^T) / 2.
pub fn check_hypothesis(a: &DiffusionMatrix) -> Result<f64, HypothesisError> {
    let entries = [a.a11, a.a12, a.a21, a.a22];
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(HypothesisError::NonFinite);
    }
    // eigenvalues of the symmetric part [[a11, m], [m, a22]], m = (a12+a21)/2
    let m = 0.5 * (a.a12 + a.a21);
    let mean = 0.5 * (a.a11 + a.a22);
    let radius = (0.25 * (a.a11 - a.a22) * (a.a11 - a.a22) + m * m).sqrt();
    let a0 = mean - radius;
    if !(a0 > 0.0) {
        return Err(HypothesisError::NotPositiveDefinite { a0 });
    }
    if !(a.a11 > a.a21.abs()) {
        return Err(HypothesisError::DominanceViolated {
            i: 1,
            j: 2,
            aii: a.a11,
            aji_abs: a.a21.abs(),
        });
    }
    if !(a.a22 > a.a12.abs()) {
        return Err(HypothesisError::DominanceViolated {
            i: 2,
            j: 1,
            aii: a.a22,
            aji_abs: a.a12.abs(),
        });
    }
    Ok(a0)
}
