//! System-level simulation of the typical user's SINR.
//!
//! Snapshot `k` of a run with seed `s` is a pure function of `(s, k)`:
//! stations are drawn annulus by annulus (width `annulus_width_m`), each
//! annulus on its own pair of streams for placement and for the interfering
//! channels, and the serving channel on a separate stream. Enlarging the
//! region by whole annuli therefore leaves the inner field and its gains
//! untouched.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::ArrayConfig;
use crate::channel::{aligned_gain_towards, misaligned_gain_towards, sample_gain, ChannelParams, GainKind};
use crate::curve::{validate_grid, CoverageCurve, CurvePoint, Method};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::gains::GainDistribution;
use crate::geometry::{assign_states, associate, sample_ppp_annulus, BaseStation, LinkState, NetworkConfig};
use crate::rng::{lane, stream, MAX_ITEM};
use crate::units::db_to_linear;

const MAX_RESAMPLES: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCRunSpec {
    pub n_snapshots: usize,
    pub seed: u64,
    pub network: NetworkConfig,
    pub tx_array: ArrayConfig,
    pub rx_array: ArrayConfig,
    #[serde(default)]
    pub channel: ChannelParams,
    pub threshold_db_grid: Vec<f64>,
    /// Replaces the normalized noise power when set.
    #[serde(default)]
    pub noise_override: Option<f64>,
    #[serde(default = "default_annulus_width")]
    pub annulus_width_m: f64,
    #[serde(default)]
    pub execution: Execution,
}

fn default_annulus_width() -> f64 {
    500.0
}

impl MCRunSpec {
    pub fn new(network: NetworkConfig, tx_array: ArrayConfig, rx_array: ArrayConfig, n_snapshots: usize, seed: u64) -> Self {
        MCRunSpec {
            n_snapshots,
            seed,
            network,
            tx_array,
            rx_array,
            channel: ChannelParams::default(),
            threshold_db_grid: crate::curve::linear_grid(-10.0, 30.0, 41),
            noise_override: None,
            annulus_width_m: default_annulus_width(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_snapshots == 0 || self.n_snapshots as u64 > MAX_ITEM {
            return Err(Error::invalid(format!("n_snapshots must be in 1..={MAX_ITEM}")));
        }
        self.network.validate()?;
        self.tx_array.validate()?;
        self.rx_array.validate()?;
        self.channel.validate()?;
        validate_grid(&self.threshold_db_grid)?;
        if let Some(n) = self.noise_override {
            if !(n >= 0.0) {
                return Err(Error::invalid("noise_override must be non-negative"));
            }
        }
        if !(self.annulus_width_m > 0.0 && self.annulus_width_m.is_finite()) {
            return Err(Error::invalid("annulus_width_m must be positive"));
        }
        if self.n_annuli() > ((u16::MAX - lane::ANNULUS_BASE) / 2) as usize {
            return Err(Error::invalid("too many annuli; widen annulus_width_m"));
        }
        Ok(())
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_override.unwrap_or_else(|| self.network.noise_power_normalized())
    }

    fn n_annuli(&self) -> usize {
        (self.network.region_radius_m / self.annulus_width_m).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotResult {
    pub sinr_linear: f64,
    pub serving_state: LinkState,
    pub serving_distance_m: f64,
    pub aligned_gain: f64,
    pub path_gain: f64,
    pub interference_linear: f64,
    pub n_stations: usize,
    /// Empty fields redrawn before this one.
    pub resamples: u32,
}

fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed ^ (u64::from(attempt)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

fn annulus_lanes(k: usize) -> (u16, u16) {
    let base = lane::ANNULUS_BASE + 2 * k as u16;
    (base, base + 1)
}

/// Stations of snapshot `index`, grouped by annulus.
fn draw_field(spec: &MCRunSpec, seed: u64, index: u64) -> Result<Vec<Vec<BaseStation>>> {
    let density = spec.network.density_per_m2();
    let radius = spec.network.region_radius_m;
    (0..spec.n_annuli())
        .map(|k| {
            let inner = k as f64 * spec.annulus_width_m;
            let outer = ((k + 1) as f64 * spec.annulus_width_m).min(radius);
            let mut rng = stream(seed, index, annulus_lanes(k).0);
            let pts = sample_ppp_annulus(density, inner, outer, &mut rng)?;
            Ok(assign_states(&pts, spec.network.los_decay_per_m, &mut rng))
        })
        .collect()
}

/// Evaluates a given field. Channels are drawn from the streams of
/// `(seed, index)`, annulus `k` of `field` using annulus `k`'s stream.
pub fn snapshot_from_field(spec: &MCRunSpec, seed: u64, index: u64, field: &[Vec<BaseStation>]) -> Result<SnapshotResult> {
    let flat: Vec<BaseStation> = field.iter().flatten().copied().collect();
    let assoc = associate(&flat, &spec.network.pathloss)?;
    let serving = flat[assoc.serving_index];
    let ue_steer = serving.azimuth();

    let mut rng = stream(seed, index, lane::SERVING);
    let aligned = aligned_gain_towards(serving.azimuth() + PI, &spec.tx_array, &spec.rx_array, &spec.channel, &mut rng).value;

    let mut interference = 0.0;
    let mut flat_index = 0;
    for (k, ring) in field.iter().enumerate() {
        let mut rng = stream(seed, index, annulus_lanes(k).1);
        for bs in ring {
            // always consume the draws so the streams stay aligned
            let tx_steer = rng.random_range(-PI..PI);
            let g = misaligned_gain_towards(bs.azimuth() + PI, tx_steer, ue_steer, &spec.tx_array, &spec.rx_array, &spec.channel, &mut rng).value;
            if flat_index != assoc.serving_index {
                interference += g * spec.network.pathloss.gain(bs.distance_m(), bs.state);
            }
            flat_index += 1;
        }
    }
    let signal = aligned * assoc.path_gain;
    Ok(SnapshotResult {
        sinr_linear: signal / (interference + spec.noise_power()),
        serving_state: assoc.serving_state,
        serving_distance_m: assoc.serving_distance_m,
        aligned_gain: aligned,
        path_gain: assoc.path_gain,
        interference_linear: interference,
        n_stations: flat.len(),
        resamples: 0,
    })
}

/// One snapshot; empty fields are redrawn from perturbed seeds.
pub fn run_snapshot(spec: &MCRunSpec, index: u64) -> Result<SnapshotResult> {
    for attempt in 0..MAX_RESAMPLES {
        let seed = attempt_seed(spec.seed, attempt);
        let field = draw_field(spec, seed, index)?;
        match snapshot_from_field(spec, seed, index, &field) {
            Ok(mut r) => {
                r.resamples = attempt;
                return Ok(r);
            }
            Err(Error::EmptySnapshot) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::invalid(format!("{MAX_RESAMPLES} consecutive empty snapshots; the region holds almost no stations")))
}

pub fn simulate(spec: &MCRunSpec) -> Result<Vec<SnapshotResult>> {
    spec.validate()?;
    map_indexed(spec.n_snapshots, spec.execution, |k| run_snapshot(spec, k as u64)).into_iter().collect()
}

/// Empirical `P(SINR >= T)` with binomial standard errors.
pub fn coverage_from_snapshots(snapshots: &[SnapshotResult], threshold_db_grid: &[f64]) -> Result<CoverageCurve> {
    validate_grid(threshold_db_grid)?;
    if snapshots.is_empty() {
        return Err(Error::invalid("no snapshots"));
    }
    let n = snapshots.len() as f64;
    let points = threshold_db_grid
        .iter()
        .map(|&t_db| {
            let t = db_to_linear(t_db);
            let hits = snapshots.iter().filter(|s| s.sinr_linear >= t).count() as f64;
            let p = hits / n;
            CurvePoint { threshold_db: t_db, probability: p, error: (p * (1.0 - p) / n).sqrt() }
        })
        .collect();
    Ok(CoverageCurve::new(Method::MonteCarlo, points))
}

/// Runs the simulation and returns the coverage curve with the snapshots.
pub fn coverage_curve_mc(spec: &MCRunSpec) -> Result<(CoverageCurve, Vec<SnapshotResult>)> {
    if spec.n_snapshots < 100 {
        return Err(Error::invalid(format!("coverage curves need at least 100 snapshots, got {}", spec.n_snapshots)));
    }
    let snaps = simulate(spec)?;
    Ok((coverage_from_snapshots(&snaps, &spec.threshold_db_grid)?, snaps))
}

/// Independent gain samples: sample `k` uses stream `(seed, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCorpus {
    pub kind: GainKind,
    pub pattern: String,
    pub n_tx: usize,
    pub n_rx: usize,
    pub samples: Vec<f64>,
    /// Digest of the producing configuration, written as a `# digest:` line.
    #[serde(default)]
    pub digest: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusRow {
    kind: GainKind,
    pattern: String,
    n_tx: usize,
    n_rx: usize,
    gain_linear: f64,
}

pub const MIN_HARVEST: usize = 1000;

pub fn harvest_gain_samples(
    kind: GainKind,
    n: usize,
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    channel: &ChannelParams,
    seed: u64,
    exec: Execution,
) -> Result<GainCorpus> {
    if n < MIN_HARVEST || n as u64 > MAX_ITEM {
        return Err(Error::invalid(format!("harvest needs at least {MIN_HARVEST} samples, got {n}")));
    }
    tx.validate()?;
    rx.validate()?;
    channel.validate()?;
    let samples = map_indexed(n, exec, |k| {
        let mut rng = stream(seed, k as u64, lane::HARVEST);
        sample_gain(kind, &mut rng, tx, rx, channel).value
    });
    let pattern = if tx.pattern == rx.pattern { tx.pattern.to_string() } else { format!("{}-{}", tx.pattern, rx.pattern) };
    Ok(GainCorpus { kind, pattern, n_tx: tx.n_elements, n_rx: rx.n_elements, samples, digest: String::new() })
}

impl GainCorpus {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.digest.is_empty() {
            writeln!(out, "# digest: {}", self.digest)?;
        }
        let mut w = csv::Writer::from_writer(out);
        for &g in &self.samples {
            w.serialize(CorpusRow { kind: self.kind, pattern: self.pattern.clone(), n_tx: self.n_tx, n_rx: self.n_rx, gain_linear: g })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a corpus; all rows must share kind, pattern and sizes.
    pub fn read_csv<R: BufRead>(input: R) -> Result<GainCorpus> {
        let mut text = String::new();
        let mut digest = String::new();
        for line in input.lines() {
            let line = line?;
            match line.strip_prefix('#') {
                Some(rest) => {
                    if let Some(d) = rest.trim().strip_prefix("digest:") {
                        digest = d.trim().to_string();
                    }
                }
                None => {
                    text.push_str(&line);
                    text.push('\n');
                }
            }
        }
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut corpus: Option<GainCorpus> = None;
        for row in rdr.deserialize::<CorpusRow>() {
            let row = row?;
            match &mut corpus {
                None => {
                    corpus = Some(GainCorpus {
                        kind: row.kind,
                        pattern: row.pattern,
                        n_tx: row.n_tx,
                        n_rx: row.n_rx,
                        samples: vec![row.gain_linear],
                        digest: digest.clone(),
                    })
                }
                Some(c) => {
                    if c.kind != row.kind || c.pattern != row.pattern || c.n_tx != row.n_tx || c.n_rx != row.n_rx {
                        return Err(Error::invalid("corpus rows disagree on kind, pattern or array sizes"));
                    }
                    c.samples.push(row.gain_linear);
                }
            }
        }
        corpus.ok_or_else(|| Error::invalid("corpus is empty"))
    }
}

/// Simulated interference field for checking the Laplace functional.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceOracle {
    pub serving: LinkState,
    pub interferer: LinkState,
    /// Serving distance; interferers start at the equal-path-loss distance.
    pub serving_distance_m: f64,
    pub outer_radius_m: f64,
    pub gain: GainDistribution,
    /// Gains above this quantile, or above `max_gain`, are set to zero.
    pub truncation_quantile: f64,
    pub max_gain: Option<f64>,
}

impl LaplaceOracle {
    /// Mean and standard error of `exp(-s I)` for each `s`, over `n` fields
    /// drawn on streams `(seed, k)`.
    pub fn estimate(&self, s: &[f64], network: &NetworkConfig, n: usize, seed: u64, exec: Execution) -> Result<Vec<(f64, f64)>> {
        network.validate()?;
        let r_min = network.pathloss.equivalent_distance(self.serving_distance_m, self.serving, self.interferer);
        if !(r_min < self.outer_radius_m) || n < 2 {
            return Err(Error::invalid("oracle needs n >= 2 and an annulus with positive area"));
        }
        let density = network.density_per_m2();
        let cap = self.max_gain.unwrap_or(f64::INFINITY);
        let fields = map_indexed(n, exec, |k| -> Result<f64> {
            let mut rng = stream(seed, k as u64, lane::INTERFERENCE_ORACLE);
            let pts = sample_ppp_annulus(density, r_min, self.outer_radius_m, &mut rng)?;
            let mut total = 0.0;
            for bs in assign_states(&pts, network.los_decay_per_m, &mut rng) {
                let u: f64 = rng.random();
                if bs.state != self.interferer || u > self.truncation_quantile {
                    continue;
                }
                let g = self.gain.quantile(u);
                if g > cap {
                    continue;
                }
                total += g * network.pathloss.gain(bs.distance_m(), bs.state);
            }
            Ok(total)
        });
        let fields = fields.into_iter().collect::<Result<Vec<f64>>>()?;
        Ok(s
            .iter()
            .map(|&s| {
                let vals: Vec<f64> = fields.iter().map(|i| (-s * i).exp()).collect();
                let m = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
                (m, (var / n as f64).sqrt())
            })
            .collect())
    }
}
