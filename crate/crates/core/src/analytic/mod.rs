//! Numerical evaluation of the association-distance density, interference
//! Laplace transforms and the three coverage expressions.

mod assoc;
mod coverage;
mod laplace;
pub mod quadrature;

use serde::{Deserialize, Serialize};

pub use assoc::{area_moment, assoc_distance_pdf, association_probability, los_area_moment};
pub use coverage::{coverage, coverage_prop1, coverage_prop2, coverage_prop3, CoverageQuery, GainModel};
pub use laplace::{laplace_interference, InterferenceKernel, LaplaceValue};

use crate::error::{Error, Result};
use quadrature::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper limit of serving-distance integrals.
    pub outer_truncation_m: f64,
    /// Upper limit of interferer-distance integrals; the field beyond it is
    /// bounded and added to the error estimate.
    pub inner_truncation_m: f64,
    /// Quantile at which misaligned gain laws are cut off.
    pub gain_truncation_quantile: f64,
    /// Largest misaligned gain kept, linear. The largest gain of a harvested
    /// corpus is a good choice.
    pub gain_truncation_max: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            outer_truncation_m: 20_000.0,
            inner_truncation_m: 20_000.0,
            gain_truncation_quantile: 1.0 - 1e-6,
            gain_truncation_max: None,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        for (name, v) in [("outer_truncation_m", self.outer_truncation_m), ("inner_truncation_m", self.inner_truncation_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.gain_truncation_quantile > 0.0 && self.gain_truncation_quantile < 1.0) {
            return Err(Error::invalid("gain_truncation_quantile must lie in (0, 1)"));
        }
        if let Some(m) = self.gain_truncation_max {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::invalid(format!("gain_truncation_max must be positive and finite, got {m}")));
            }
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.rel_tol, self.abs_tol)
    }
}
