//! Semi-analytic SINR coverage curves.

use serde::{Deserialize, Serialize};

use super::assoc::{outer_points, outer_residual, pdf_unchecked};
use super::laplace::{laplace_interference, InterferenceKernel};
use super::quadrature::integrate_with;
use super::QuadratureSpec;
use crate::curve::{validate_grid, CoverageCurve, CurvePoint, Method};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::gains::{GainDistribution, SimplifiedGainModel};
use crate::geometry::{LinkState, NetworkConfig};
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainModel {
    /// Fitted laws. A missing misaligned law means interferers contribute
    /// nothing.
    Fitted { aligned: GainDistribution, misaligned: Option<GainDistribution> },
    Simplified(SimplifiedGainModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageQuery {
    pub threshold_db_grid: Vec<f64>,
    pub network: NetworkConfig,
    pub gain_model: GainModel,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub execution: Execution,
}

/// How the serving-link gain CCDF turns `x = E[exp(-s (I + noise))]` into a
/// coverage contribution.
#[derive(Debug, Clone, Copy)]
enum Serving {
    /// `P(G > y) = exp(-rate y)`: coverage is `x` itself.
    Exponential { rate: f64 },
    /// `P(G > y) = ln(1 - (1 - p) e^{-b y}) / ln p`, with the expectation
    /// moved inside the logarithm.
    ExpLog { b: f64, p: f64 },
}

impl Serving {
    fn rate(self) -> f64 {
        match self {
            Serving::Exponential { rate } => rate,
            Serving::ExpLog { b, .. } => b,
        }
    }

    fn map(self, x: f64) -> f64 {
        match self {
            Serving::Exponential { .. } => x,
            Serving::ExpLog { p, .. } => (-(1.0 - p) * x).ln_1p() / p.ln(),
        }
    }

    /// Slope of `map` at `x`. Nondecreasing, so it bounds the slope on `[0, x]`.
    fn slope(self, x: f64) -> f64 {
        match self {
            Serving::Exponential { .. } => 1.0,
            Serving::ExpLog { p, .. } => (1.0 - p) / ((1.0 - (1.0 - p) * x) * -p.ln()),
        }
    }
}

impl CoverageQuery {
    fn validate(&self) -> Result<()> {
        validate_grid(&self.threshold_db_grid)?;
        self.network.validate()?;
        self.quadrature.validate()?;
        if self.network.pathloss.alpha_nlos <= 2.0 {
            return Err(Error::invalid("analytic curves need alpha_nlos > 2 for a finite interference field"));
        }
        Ok(())
    }

    fn misaligned_kernel(&self, misaligned: &Option<GainDistribution>) -> Result<InterferenceKernel> {
        match misaligned {
            None => Ok(InterferenceKernel::Silent),
            Some(law) => InterferenceKernel::from_distribution(law, self.quadrature.gain_truncation_quantile, self.quadrature.gain_truncation_max),
        }
    }
}

/// Exponential aligned gain, any misaligned law.
pub fn coverage_prop1(query: &CoverageQuery) -> Result<CoverageCurve> {
    query.validate()?;
    match &query.gain_model {
        GainModel::Fitted { aligned: GainDistribution::Exponential { mu }, misaligned } => {
            let kernel = query.misaligned_kernel(misaligned)?;
            evaluate(query, Method::Prop1, Serving::Exponential { rate: *mu }, &kernel)
        }
        _ => Err(Error::invalid("proposition 1 needs a fitted model with an exponential aligned gain")),
    }
}

/// Exponential-logarithmic aligned gain, any misaligned law.
pub fn coverage_prop2(query: &CoverageQuery) -> Result<CoverageCurve> {
    query.validate()?;
    match &query.gain_model {
        GainModel::Fitted { aligned: GainDistribution::ExpLogarithmic { b, p }, misaligned } => {
            let kernel = query.misaligned_kernel(misaligned)?;
            evaluate(query, Method::Prop2, Serving::ExpLog { b: *b, p: *p }, &kernel)
        }
        _ => Err(Error::invalid("proposition 2 needs a fitted model with an exponential-logarithmic aligned gain")),
    }
}

/// Main/side-lobe gains with Rayleigh fading.
pub fn coverage_prop3(query: &CoverageQuery) -> Result<CoverageCurve> {
    query.validate()?;
    match &query.gain_model {
        GainModel::Simplified(model) => {
            let kernel = InterferenceKernel::mixture(&model.interference_mixture())?;
            evaluate(query, Method::Prop3, Serving::Exponential { rate: 1.0 / model.aligned_mean() }, &kernel)
        }
        _ => Err(Error::invalid("proposition 3 needs a simplified gain model")),
    }
}

pub fn coverage(method: Method, query: &CoverageQuery) -> Result<CoverageCurve> {
    match method {
        Method::Prop1 => coverage_prop1(query),
        Method::Prop2 => coverage_prop2(query),
        Method::Prop3 => coverage_prop3(query),
        Method::MonteCarlo => Err(Error::invalid("simulated curves come from the montecarlo module")),
    }
}

fn evaluate(query: &CoverageQuery, method: Method, serving: Serving, kernel: &InterferenceKernel) -> Result<CoverageCurve> {
    let grid = &query.threshold_db_grid;
    let points = map_indexed(grid.len(), query.execution, |k| {
        coverage_point(grid[k], &query.network, &query.quadrature, serving, kernel)
    });
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CoverageCurve::new(method, points))
}

fn coverage_point(
    threshold_db: f64,
    network: &NetworkConfig,
    spec: &QuadratureSpec,
    serving: Serving,
    kernel: &InterferenceKernel,
) -> Result<CurvePoint> {
    let t = db_to_linear(threshold_db);
    let sigma2 = network.noise_power_normalized();
    let pts = outer_points(spec);
    let mut probability = 0.0;
    let mut error = outer_residual(network, spec.outer_truncation_m);
    for i in LinkState::BOTH {
        // (r, error density) at every node the outer rule visits
        let mut inner: Vec<(f64, f64)> = Vec::new();
        let q = integrate_with(
            |r| {
                let f = pdf_unchecked(r, i, network);
                if f == 0.0 {
                    return Ok(0.0);
                }
                let s = serving.rate() * t / network.pathloss.gain(r, i);
                let mut x = (-s * sigma2).exp();
                if x == 0.0 {
                    return Ok(0.0);
                }
                let mut err = 0.0;
                for j in LinkState::BOTH {
                    let l = laplace_interference(s, i, j, r, kernel, network, spec)?;
                    x *= l.value;
                    err += l.error;
                }
                // the exponents are underestimated by at most `err`, so the
                // exact x lies in [x e^-err, x]
                inner.push((r, f * serving.slope(x) * x * err.min(1.0)));
                Ok(f * serving.map(x))
            },
            &pts,
            spec.tolerance(),
        )?;
        probability += q.value;
        error += q.error + trapezoid(&mut inner);
    }
    Ok(CurvePoint { threshold_db, probability: probability.clamp(0.0, 1.0), error })
}

/// Trapezoid rule over scattered samples, starting from zero at the origin.
fn trapezoid(samples: &mut [(f64, f64)]) -> f64 {
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prev = (0.0, 0.0);
    let mut sum = 0.0;
    for &(r, v) in samples.iter() {
        sum += 0.5 * (r - prev.0) * (v + prev.1);
        prev = (r, v);
    }
    sum
}
