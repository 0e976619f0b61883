//! Edge detector g: positive, nonincreasing in |s|, throttles diffusion
//! where the argument (a derivative magnitude or the auxiliary component)
//! is large.

use crate::grid::QuadratureField;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("detector scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("constant detector value must be positive and finite, got {0}")]
    BadConstant(f64),
}

/// Floor applied to evaluated values so quadrature coefficients stay
/// strictly positive even when exp underflows.
const DETECTOR_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeDetector {
    /// g(s) = exp(-s^2 / lambda^2)
    Exponential { lambda: f64 },
    /// g(s) = 1 / (1 + (s/lambda)^2)
    Rational { lambda: f64 },
    /// g(s) = value
    Constant { value: f64 },
}

impl EdgeDetector {
    pub fn exponential(lambda: f64) -> Result<Self, DetectorError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(DetectorError::BadScale(lambda));
        }
        Ok(Self::Exponential { lambda })
    }

    pub fn rational(lambda: f64) -> Result<Self, DetectorError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(DetectorError::BadScale(lambda));
        }
        Ok(Self::Rational { lambda })
    }

    pub fn constant(value: f64) -> Result<Self, DetectorError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(DetectorError::BadConstant(value));
        }
        Ok(Self::Constant { value })
    }

    /// Always strictly positive for finite input.
    pub fn evaluate(&self, s: f64) -> f64 {
        match *self {
            Self::Exponential { lambda } => {
                let t = s / lambda;
                (-(t * t)).exp().max(DETECTOR_FLOOR)
            }
            Self::Rational { lambda } => {
                let t = s / lambda;
                (1.0 / (1.0 + t * t)).max(DETECTOR_FLOOR)
            }
            Self::Constant { value } => value,
        }
    }

    /// Upper bound of the detector over all arguments (g(0) for the
    /// decreasing kinds); used by explicit-scheme stability checks.
    pub fn max_value(&self) -> f64 {
        match *self {
            Self::Exponential { .. } | Self::Rational { .. } => 1.0,
            Self::Constant { value } => value,
        }
    }

    pub fn evaluate_field(&self, q: &QuadratureField) -> QuadratureField {
        q.map(|s| self.evaluate(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_kinds_are_one_at_zero_and_decreasing() {
        for det in [
            EdgeDetector::exponential(0.5).unwrap(),
            EdgeDetector::rational(0.5).unwrap(),
        ] {
            assert_eq!(det.evaluate(0.0), 1.0);
            let mut prev = 1.0;
            for s in [0.1, 0.5, 1.0, 5.0, 100.0] {
                let v = det.evaluate(s);
                // nonincreasing; equality only once the positivity floor is hit
                assert!(v <= prev);
                assert!(v > 0.0);
                prev = v;
            }
            // symmetric in s
            assert_eq!(det.evaluate(-2.0), det.evaluate(2.0));
        }
    }

    #[test]
    fn exponential_matches_formula() {
        let det = EdgeDetector::exponential(0.15).unwrap();
        let s = 0.3;
        assert!((det.evaluate(s) - (-(s * s) / 0.0225).exp()).abs() < 1e-15);
    }

    #[test]
    fn rational_matches_formula() {
        let det = EdgeDetector::rational(10.0).unwrap();
        assert!((det.evaluate(10.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn positivity_survives_underflow() {
        let det = EdgeDetector::exponential(0.15).unwrap();
        assert!(det.evaluate(1e6) > 0.0);
        assert!(det.evaluate(f64::MAX) > 0.0);
        let det = EdgeDetector::rational(0.15).unwrap();
        assert!(det.evaluate(f64::MAX) > 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(EdgeDetector::exponential(0.0).is_err());
        assert!(EdgeDetector::rational(-1.0).is_err());
        assert!(EdgeDetector::constant(0.0).is_err());
        assert!(EdgeDetector::constant(f64::INFINITY).is_err());
    }
}
