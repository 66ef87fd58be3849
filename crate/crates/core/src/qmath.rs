//! q-number arithmetic.
//!
//! With `q = e^tau`, the q-number of a real `x` is
//! `[x] = (q^x - q^-x) / (q - q^-1) = sinh(x tau) / sinh(tau)`.
//! The hyperbolic form is used throughout; it avoids the cancellation of
//! the power form when `q` is close to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|tau|` the q-number is replaced by its analytic limit `x`.
pub const TAU_EXACT_LIMIT: f64 = 1e-12;

/// The single deformation parameter of the model, stored as `tau` with `q = e^tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationParameter {
    tau: f64,
}

impl DeformationParameter {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::invalid(format!("tau must be finite, got {tau}")));
        }
        Ok(Self { tau })
    }

    /// The undeformed oscillator, `q = 1`.
    pub const fn classical() -> Self {
        Self { tau: 0.0 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn q(&self) -> f64 {
        self.tau.exp()
    }

    pub fn is_classical(&self) -> bool {
        self.tau.abs() < TAU_EXACT_LIMIT
    }
}

impl Default for DeformationParameter {
    fn default() -> Self {
        Self::classical()
    }
}

/// The q-number `[x]`.
pub fn q_number(x: f64, dp: DeformationParameter) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("q-number argument must be finite, got {x}")));
    }
    Ok(q_number_unchecked(x, dp))
}

pub(crate) fn q_number_unchecked(x: f64, dp: DeformationParameter) -> f64 {
    if dp.is_classical() {
        x
    } else {
        (x * dp.tau).sinh() / dp.tau.sinh()
    }
}
