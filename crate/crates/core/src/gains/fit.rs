//! Histogram-RMSE fitting of the gain laws.
//!
//! The samples are binned into a normalized histogram density; each family's
//! parameters are chosen to minimize the root-mean-square difference between
//! that density and the family's average density over each bin. The search is
//! a Nelder-Mead simplex in an unconstrained reparameterization (logs of the
//! positive parameters, logit of `p`) run from eight deterministic starts.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dist::{dilog, Family, GainDistribution};
use crate::error::{Error, Result};
use crate::rng::stream;

pub const MIN_FIT_SAMPLES: usize = 1000;
const N_STARTS: u64 = 8;
const START_SPREAD: f64 = 1.5;
const F_TOL: f64 = 1e-10;
const MAX_EVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinScale {
    Linear,
    Log,
}

/// Histogram layout. Bins span `[q(lower_quantile), q(upper_quantile)]` of
/// the sample; a zero lower quantile means 0 for linear bins and the smallest
/// positive sample for log bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinSpec {
    pub scale: BinScale,
    pub n_bins: usize,
    pub lower_quantile: f64,
    pub upper_quantile: f64,
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec { scale: BinScale::Linear, n_bins: 100, lower_quantile: 0.0, upper_quantile: 0.999 }
    }
}

impl BinSpec {
    pub fn log() -> Self {
        BinSpec { scale: BinScale::Log, ..BinSpec::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::invalid("a histogram needs at least 2 bins"));
        }
        if !(0.0 <= self.lower_quantile && self.lower_quantile < self.upper_quantile && self.upper_quantile <= 1.0) {
            return Err(Error::invalid("bin quantiles must satisfy 0 <= lower < upper <= 1"));
        }
        Ok(())
    }
}

/// Empirical density on fixed bins, normalized by the full sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub n_samples: usize,
}

fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

impl Histogram {
    pub fn build(samples: &[f64], spec: &BinSpec) -> Result<Histogram> {
        spec.validate()?;
        if samples.len() < MIN_FIT_SAMPLES {
            return Err(Error::DegenerateSamples(format!("{} samples, at least {MIN_FIT_SAMPLES} needed", samples.len())));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::DegenerateSamples(format!("sample {bad} is not a finite non-negative gain")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted[0] == sorted[sorted.len() - 1] {
            return Err(Error::DegenerateSamples("all samples are equal".into()));
        }
        let hi = empirical_quantile(&sorted, spec.upper_quantile);
        let edges: Vec<f64> = match spec.scale {
            BinScale::Linear => {
                let lo = if spec.lower_quantile == 0.0 { 0.0 } else { empirical_quantile(&sorted, spec.lower_quantile) };
                (0..=spec.n_bins).map(|i| lo + (hi - lo) * i as f64 / spec.n_bins as f64).collect()
            }
            BinScale::Log => {
                let positive = &sorted[sorted.partition_point(|&x| x <= 0.0)..];
                if positive.len() < 2 {
                    return Err(Error::DegenerateSamples("log bins need positive samples".into()));
                }
                let lo = if spec.lower_quantile == 0.0 { positive[0] } else { empirical_quantile(&sorted, spec.lower_quantile) };
                let (l0, l1) = (lo.ln(), hi.ln());
                (0..=spec.n_bins).map(|i| (l0 + (l1 - l0) * i as f64 / spec.n_bins as f64).exp()).collect()
            }
        };
        if !(edges[spec.n_bins] > edges[0]) {
            return Err(Error::DegenerateSamples("bin range is empty".into()));
        }
        let mut counts = vec![0usize; spec.n_bins];
        let start = sorted.partition_point(|&x| x < edges[0]);
        let mut bin = 0;
        for &x in &sorted[start..] {
            if x > edges[spec.n_bins] {
                break;
            }
            while bin + 1 < spec.n_bins && x >= edges[bin + 1] {
                bin += 1;
            }
            counts[bin] += 1;
        }
        let n = samples.len() as f64;
        let density = counts.iter().zip(edges.windows(2)).map(|(&c, w)| c as f64 / (n * (w[1] - w[0]))).collect();
        Ok(Histogram { edges, density, n_samples: samples.len() })
    }

    /// RMSE between the histogram and the distribution's bin-averaged density.
    pub fn rmse(&self, dist: &GainDistribution) -> f64 {
        let mut prev = dist.cdf(self.edges[0]);
        let mut acc = 0.0;
        for (i, h) in self.density.iter().enumerate() {
            let (lo, hi) = (self.edges[i], self.edges[i + 1]);
            let c = dist.cdf(hi);
            let model = (c - prev) / (hi - lo);
            prev = c;
            acc += (model - h) * (model - h);
        }
        (acc / self.density.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub params: Vec<f64>,
    pub rmse: f64,
    pub n_samples: usize,
    pub bin_spec: BinSpec,
    /// False when every start hit the evaluation limit.
    pub converged: bool,
}

impl FitReport {
    pub fn distribution(&self) -> Result<GainDistribution> {
        GainDistribution::from_params(self.family, &self.params)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn decode(family: Family, theta: &[f64]) -> Option<GainDistribution> {
    let e = |x: f64| x.exp();
    let d = match family {
        Family::Exponential => GainDistribution::exponential(e(theta[0])),
        Family::ExpLogarithmic => GainDistribution::exp_logarithmic(e(theta[0]), logistic(theta[1])),
        Family::LogLogistic => GainDistribution::log_logistic(e(theta[0]), e(theta[1])),
        Family::Nakagami => GainDistribution::nakagami(e(theta[0]), e(theta[1])),
        Family::LogNormal => GainDistribution::log_normal(e(theta[0]), theta[1]),
        Family::Burr => GainDistribution::burr(e(theta[0]), e(theta[1])),
    };
    d.ok()
}

struct SampleStats {
    mean: f64,
    second: f64,
    fourth: f64,
    log_mean: f64,
    log_sd: f64,
    median: f64,
}

fn stats(samples: &[f64]) -> SampleStats {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let second = samples.iter().map(|x| x * x).sum::<f64>() / n;
    let fourth = samples.iter().map(|x| (x * x).powi(2)).sum::<f64>() / n;
    let logs: Vec<f64> = samples.iter().filter(|x| **x > 0.0).map(|x| x.ln()).collect();
    let ln = logs.len().max(1) as f64;
    let log_mean = logs.iter().sum::<f64>() / ln;
    let log_sd = (logs.iter().map(|l| (l - log_mean).powi(2)).sum::<f64>() / ln).sqrt().max(1e-3);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = empirical_quantile(&sorted, 0.5).max(f64::MIN_POSITIVE);
    SampleStats { mean, second, fourth, log_mean, log_sd, median }
}

/// ExpLog rate matching the sample mean for a given `p`.
fn explog_rate_for_mean(p: f64, mean: f64) -> f64 {
    -dilog(1.0 - p) / (mean * p.ln())
}

fn initial_guess(family: Family, s: &SampleStats) -> Vec<f64> {
    let logistic_b = std::f64::consts::PI / (3f64.sqrt() * s.log_sd);
    match family {
        Family::Exponential => vec![(1.0 / s.mean).ln()],
        Family::ExpLogarithmic => {
            let p: f64 = 0.1;
            vec![explog_rate_for_mean(p, s.mean).ln(), logit(p)]
        }
        Family::LogLogistic => vec![s.median.ln(), logistic_b.ln()],
        Family::Nakagami => {
            let m = (s.second * s.second / (s.fourth - s.second * s.second)).clamp(1e-3, 1e3);
            vec![m.ln(), s.second.ln()]
        }
        Family::LogNormal => vec![s.log_sd.ln(), s.log_mean],
        Family::Burr => {
            // median 1 for k = 1; shift c so that the sample median is matched
            // by k = (ln 2) / ln(1 + median^c)
            let c = logistic_b;
            let k = std::f64::consts::LN_2 / s.median.powf(c).ln_1p();
            vec![c.ln(), k.max(1e-12).ln()]
        }
    }
}

fn perturbed_start(family: Family, base: &[f64], s: &SampleStats, k: u64) -> Vec<f64> {
    if k == 0 {
        return base.to_vec();
    }
    let mut rng = stream(0x6a1_f17, k, family as u16);
    let mut theta: Vec<f64> =
        base.iter().map(|b| b + START_SPREAD * rng.sample::<f64, _>(StandardNormal)).collect();
    if family == Family::ExpLogarithmic {
        // wider spread on p, then keep the mean
        theta[1] = base[1] + 3.0 * rng.sample::<f64, _>(StandardNormal);
        let p = logistic(theta[1]).clamp(1e-12, 1.0 - 1e-12);
        theta[0] = explog_rate_for_mean(p, s.mean).ln();
    }
    theta
}

struct Minimum {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

/// Nelder-Mead simplex on an unconstrained objective.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[n]);
        let size = simplex[1..].iter().map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if (worst - best).abs() <= F_TOL * best.abs() && size < 1e-6 || size < 1e-12 {
            return Minimum { x: simplex[0].clone(), f: best, converged: true };
        }
        if evals >= MAX_EVALS {
            return Minimum { x: simplex[0].clone(), f: best, converged: false };
        }

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + sigma * (x - b)).collect();
            values[i] = f(&shrunk);
            simplex[i] = shrunk;
            evals += 1;
        }
    }
}

/// Fits one family to `samples` on the histogram described by `spec`.
pub fn fit(samples: &[f64], family: Family, spec: &BinSpec) -> Result<FitReport> {
    let hist = Histogram::build(samples, spec)?;
    fit_histogram(&hist, samples, family, spec)
}

fn fit_histogram(hist: &Histogram, samples: &[f64], family: Family, spec: &BinSpec) -> Result<FitReport> {
    let s = stats(samples);
    let objective = |theta: &[f64]| -> f64 {
        if theta.iter().any(|t| !t.is_finite() || t.abs() > 700.0) {
            return f64::INFINITY;
        }
        match decode(family, theta) {
            Some(d) => {
                let r = hist.rmse(&d);
                if r.is_finite() {
                    r
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        }
    };
    let base = initial_guess(family, &s);
    let mut best: Option<Minimum> = None;
    let mut any_converged = false;
    for k in 0..N_STARTS {
        let x0 = perturbed_start(family, &base, &s, k);
        if !objective(&x0).is_finite() {
            continue;
        }
        let first = nelder_mead(&objective, &x0, 0.5);
        // a restart from the optimum guards against a collapsed simplex
        let m = nelder_mead(&objective, &first.x, 0.1);
        any_converged |= m.converged;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.ok_or(Error::NonConvergence { value: f64::NAN, error: f64::INFINITY })?;
    let dist = decode(family, &best.x).ok_or(Error::NonConvergence { value: best.f, error: f64::INFINITY })?;
    Ok(FitReport { family, params: dist.params(), rmse: best.f, n_samples: samples.len(), bin_spec: *spec, converged: any_converged })
}

/// Fits every family in `families` on one histogram and returns the
/// reports sorted by increasing RMSE.
pub fn fit_all(samples: &[f64], families: &[Family], spec: &BinSpec) -> Result<Vec<FitReport>> {
    let hist = Histogram::build(samples, spec)?;
    let mut reports = families.iter().map(|&f| fit_histogram(&hist, samples, f, spec)).collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.rmse.total_cmp(&b.rmse));
    Ok(reports)
}
