//! Coverage curves shared by the simulator and the analytic evaluators.
//!
//! CSV layout: an optional `# digest: <hex>` comment line, then the header
//! `threshold_db,probability,stderr_or_error_estimate`. Floats are written in
//! shortest round-trip form.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mc")]
    MonteCarlo,
    #[serde(rename = "prop1")]
    Prop1,
    #[serde(rename = "prop2")]
    Prop2,
    #[serde(rename = "prop3")]
    Prop3,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::Prop1 => "prop1",
            Method::Prop2 => "prop2",
            Method::Prop3 => "prop3",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold_db: f64,
    pub probability: f64,
    /// Binomial standard error for simulated curves, quadrature error
    /// estimate for analytic ones.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub method: Method,
    pub points: Vec<CurvePoint>,
    /// Digest of the configuration that produced the curve; empty if unset.
    #[serde(default)]
    pub digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveGap {
    pub max_abs_gap: f64,
    pub argmax_threshold_db: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    threshold_db: f64,
    probability: f64,
    stderr_or_error_estimate: f64,
}

/// Checks that a threshold grid is non-empty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("threshold grid is empty"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("threshold grid has non-finite entries"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("threshold grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` evenly spaced thresholds from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl CoverageCurve {
    pub fn new(method: Method, points: Vec<CurvePoint>) -> Self {
        CoverageCurve { method, points, digest: String::new() }
    }

    pub fn thresholds_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.threshold_db).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.probability).collect()
    }

    pub fn probability_at(&self, threshold_db: f64) -> Option<f64> {
        self.points.iter().find(|p| (p.threshold_db - threshold_db).abs() < 1e-9).map(|p| p.probability)
    }

    /// True if the curve never rises by more than `tol` between neighbours.
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].probability <= w[0].probability + tol)
    }

    /// Largest absolute difference over a shared threshold grid.
    pub fn max_abs_gap(&self, other: &CoverageCurve) -> Result<CurveGap> {
        if self.points.len() != other.points.len() || self.points.is_empty() {
            return Err(Error::invalid(format!(
                "curves have {} and {} points; they must share one threshold grid",
                self.points.len(),
                other.points.len()
            )));
        }
        let mut best = CurveGap { max_abs_gap: -1.0, argmax_threshold_db: f64::NAN };
        for (a, b) in self.points.iter().zip(&other.points) {
            if (a.threshold_db - b.threshold_db).abs() > 1e-9 {
                return Err(Error::invalid(format!("threshold grids differ at {} dB vs {} dB", a.threshold_db, b.threshold_db)));
            }
            let gap = (a.probability - b.probability).abs();
            if gap > best.max_abs_gap {
                best = CurveGap { max_abs_gap: gap, argmax_threshold_db: a.threshold_db };
            }
        }
        Ok(best)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.digest.is_empty() {
            writeln!(out, "# digest: {}", self.digest)?;
        }
        writeln!(out, "# method: {}", self.method)?;
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(Row { threshold_db: p.threshold_db, probability: p.probability, stderr_or_error_estimate: p.error })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a curve written by [`CoverageCurve::write_csv`]. The method
    /// comes from the `# method:` line when present, otherwise `fallback`.
    pub fn read_csv<R: BufRead>(input: R, fallback: Method) -> Result<CoverageCurve> {
        let mut text = String::new();
        let mut digest = String::new();
        let mut method = fallback;
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(d) = rest.strip_prefix("digest:") {
                    digest = d.trim().to_string();
                } else if let Some(m) = rest.strip_prefix("method:") {
                    method = serde_json::from_value(serde_json::Value::String(m.trim().to_string()))?;
                }
                continue;
            }
            text.push_str(&line);
            text.push('\n');
        }
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let points = rdr
            .deserialize::<Row>()
            .map(|r| r.map(|r| CurvePoint { threshold_db: r.threshold_db, probability: r.probability, error: r.stderr_or_error_estimate }))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CoverageCurve { method, points, digest })
    }
}
