//! Cluster/subpath channel realizations and the beamforming gains they give.
//!
//! A link is drawn as `K = max(Poisson(1.8), 1)` clusters with 1 to 10
//! subpaths each. Cluster 1 points along the geometric line between the two
//! ends; the other cluster centres are uniform and drawn separately for the
//! departure and arrival side. Subpath powers follow the lognormal-shadowed
//! power law of the 28 GHz model and are normalized to sum to one.
//!
//! Angle convention: `los_direction` is the azimuth of the receiver as seen
//! from the transmitter. The first cluster therefore departs at
//! `los_direction` and arrives from `los_direction + pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::antenna::{ArrayConfig, BeamFrame};
use crate::error::{Error, Result};

/// Large-scale statistics of the cluster model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub mean_clusters: f64,
    pub max_subpaths: u32,
    /// Mean of the exponential subpath spread, radians.
    pub subpath_spread_mean_rad: f64,
    pub subpath_spread_min_rad: f64,
    /// Exponent `tau` in the `U^(tau - 1)` cluster power term.
    pub power_tau: f64,
    pub shadowing_std_db: f64,
    pub subpath_power_jitter: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            mean_clusters: 1.8,
            max_subpaths: 10,
            subpath_spread_mean_rad: 0.178,
            subpath_spread_min_rad: 0.0122,
            power_tau: 2.8,
            shadowing_std_db: 4.0,
            subpath_power_jitter: 0.6,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mean_clusters", self.mean_clusters),
            ("subpath_spread_mean_rad", self.subpath_spread_mean_rad),
            ("power_tau", self.power_tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("channel parameter {name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("subpath_spread_min_rad", self.subpath_spread_min_rad),
            ("shadowing_std_db", self.shadowing_std_db),
            ("subpath_power_jitter", self.subpath_power_jitter),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("channel parameter {name} must be non-negative, got {v}")));
            }
        }
        if self.max_subpaths == 0 {
            return Err(Error::invalid("max_subpaths must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subpath {
    pub aod: f64,
    pub aoa: f64,
    pub power: f64,
    pub phase: f64,
}

impl Subpath {
    /// Small-scale coefficient `sqrt(P) e^{j phase}`.
    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.power.sqrt(), self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub angle_tx: f64,
    pub angle_rx: f64,
    pub subpaths: Vec<Subpath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn k_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn subpaths(&self) -> impl Iterator<Item = &Subpath> {
        self.clusters.iter().flat_map(|c| c.subpaths.iter())
    }

    pub fn total_power(&self) -> f64 {
        self.subpaths().map(|s| s.power).sum()
    }

    /// Adds `delta` to every angle of the set.
    pub fn rotated(&self, delta: f64) -> ClusterSet {
        ClusterSet {
            clusters: self
                .clusters
                .iter()
                .map(|c| Cluster {
                    angle_tx: c.angle_tx + delta,
                    angle_rx: c.angle_rx + delta,
                    subpaths: c.subpaths.iter().map(|s| Subpath { aod: s.aod + delta, aoa: s.aoa + delta, ..*s }).collect(),
                })
                .collect(),
        }
    }

    /// A single unit-power path leaving at `aod` and arriving from `aoa`.
    pub fn single_path(aod: f64, aoa: f64) -> ClusterSet {
        ClusterSet {
            clusters: vec![Cluster { angle_tx: aod, angle_rx: aoa, subpaths: vec![Subpath { aod, aoa, power: 1.0, phase: 0.0 }] }],
        }
    }
}

/// Draws one link's clusters and subpaths.
pub fn sample_cluster_set<R: Rng + ?Sized>(los_direction: f64, params: &ChannelParams, rng: &mut R) -> ClusterSet {
    let k = Poisson::new(params.mean_clusters).map(|p| p.sample(rng) as usize).unwrap_or(0).max(1);
    let spread = Exp::new(1.0 / params.subpath_spread_mean_rad).expect("validated spread mean");
    let shadow = Normal::new(0.0, params.shadowing_std_db).expect("validated shadowing");

    let mut clusters = Vec::with_capacity(k);
    let mut raw_total = 0.0;
    for idx in 0..k {
        let (angle_tx, angle_rx) = if idx == 0 {
            (los_direction, los_direction + PI)
        } else {
            (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI))
        };
        let l = rng.random_range(1..=params.max_subpaths) as usize;
        let u: f64 = rng.random();
        let z = shadow.sample(rng);
        let cluster_scale = u.powf(params.power_tau - 1.0) * 10f64.powf(-0.1 * z) / l as f64;
        let subpaths = (1..=l)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let s_tx = spread.sample(rng).max(params.subpath_spread_min_rad);
                let s_rx = spread.sample(rng).max(params.subpath_spread_min_rad);
                let v = rng.random::<f64>() * params.subpath_power_jitter;
                let power = cluster_scale * 10f64.powf(v);
                raw_total += power;
                Subpath {
                    aod: angle_tx + sign * s_tx / 2.0,
                    aoa: angle_rx + sign * s_rx / 2.0,
                    power,
                    phase: rng.random_range(0.0..2.0 * PI),
                }
            })
            .collect();
        clusters.push(Cluster { angle_tx, angle_rx, subpaths });
    }
    // U = 0 with one cluster would leave nothing to normalize
    if raw_total > 0.0 && raw_total.is_finite() {
        for s in clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
            s.power /= raw_total;
        }
    } else {
        let n = clusters.iter().map(|c| c.subpaths.len()).sum::<usize>() as f64;
        for s in clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
            s.power = 1.0 / n;
        }
    }
    ClusterSet { clusters }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainKind {
    Aligned,
    Misaligned,
}

impl GainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GainKind::Aligned => "aligned",
            GainKind::Misaligned => "misaligned",
        }
    }
}

impl std::fmt::Display for GainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aligned" => Ok(GainKind::Aligned),
            "misaligned" => Ok(GainKind::Misaligned),
            other => Err(Error::invalid(format!("unknown gain kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGainSample {
    pub value: f64,
    pub kind: GainKind,
}

/// Per-side beam state: the panel frame of the steered beam.
struct Side<'a> {
    cfg: &'a ArrayConfig,
    frame: BeamFrame,
}

impl Side<'_> {
    /// Element field times normalized array response towards global `angle`.
    #[inline]
    fn response(&self, angle: f64) -> Complex64 {
        let local = self.frame.local(angle);
        self.cfg.beam_response(self.frame.steer_local_rad, local) * self.cfg.element_field(local)
    }
}

/// Beamforming gain `|sum_kl g_kl F_rx A_rx F_tx A_tx|^2` of a link whose
/// transmit beam is steered at global azimuth `tx_steer` and receive beam at
/// `rx_steer`. Linear power, peak `n_tx n_rx` times the element peaks.
pub fn link_gain(cs: &ClusterSet, tx: &ArrayConfig, rx: &ArrayConfig, tx_steer: f64, rx_steer: f64) -> f64 {
    let t = Side { cfg: tx, frame: tx.frame(tx_steer) };
    let r = Side { cfg: rx, frame: rx.frame(rx_steer) };
    let sum: Complex64 = cs
        .subpaths()
        .map(|s| s.coefficient() * r.response(s.aoa) * t.response(s.aod).conj())
        .sum();
    sum.norm_sqr()
}

/// Serving-link gain for a transmitter that sees the receiver at azimuth
/// `los_direction`; both beams point along the first cluster.
pub fn aligned_gain_towards<R: Rng + ?Sized>(
    los_direction: f64,
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    params: &ChannelParams,
    rng: &mut R,
) -> LinkGainSample {
    let cs = sample_cluster_set(los_direction, params, rng);
    let c1 = &cs.clusters[0];
    let value = link_gain(&cs, tx, rx, c1.angle_tx, c1.angle_rx);
    LinkGainSample { value, kind: GainKind::Aligned }
}

/// Interfering-link gain: the transmitter's beam points in `tx_steer`, the
/// receiver's beam in `rx_steer` (towards its own serving station).
pub fn misaligned_gain_towards<R: Rng + ?Sized>(
    los_direction: f64,
    tx_steer: f64,
    rx_steer: f64,
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    params: &ChannelParams,
    rng: &mut R,
) -> LinkGainSample {
    let cs = sample_cluster_set(los_direction, params, rng);
    LinkGainSample { value: link_gain(&cs, tx, rx, tx_steer, rx_steer), kind: GainKind::Misaligned }
}

/// Aligned gain of a link with a uniformly random geometry.
pub fn aligned_gain<R: Rng + ?Sized>(rng: &mut R, tx: &ArrayConfig, rx: &ArrayConfig, params: &ChannelParams) -> LinkGainSample {
    let los = rng.random_range(-PI..PI);
    aligned_gain_towards(los, tx, rx, params, rng)
}

/// Misaligned gain with uniformly random geometry, transmit beam and
/// receive beam.
pub fn misaligned_gain<R: Rng + ?Sized>(rng: &mut R, tx: &ArrayConfig, rx: &ArrayConfig, params: &ChannelParams) -> LinkGainSample {
    let los = rng.random_range(-PI..PI);
    let tx_steer = rng.random_range(-PI..PI);
    let rx_steer = rng.random_range(-PI..PI);
    misaligned_gain_towards(los, tx_steer, rx_steer, tx, rx, params, rng)
}

pub fn sample_gain<R: Rng + ?Sized>(
    kind: GainKind,
    rng: &mut R,
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    params: &ChannelParams,
) -> LinkGainSample {
    match kind {
        GainKind::Aligned => aligned_gain(rng, tx, rx, params),
        GainKind::Misaligned => misaligned_gain(rng, tx, rx, params),
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::{amplitude_vector, element_gain, steering_vector, wrap_pi, ElementPattern};
    use crate::rng::stream;
    use crate::units::db_to_linear;
    use approx::assert_relative_eq;

    fn iso(n: usize) -> ArrayConfig {
        ArrayConfig::new(ElementPattern::Iso, n).unwrap()
    }

    fn tgpp(n: usize) -> ArrayConfig {
        ArrayConfig::new(ElementPattern::ThreeGpp, n).unwrap()
    }

    /// Explicit vectors and loops, no closed forms.
    fn naive_link_gain(cs: &ClusterSet, tx: &ArrayConfig, rx: &ArrayConfig, tx_steer: f64, rx_steer: f64) -> f64 {
        let side_vectors = |cfg: &ArrayConfig, steer: f64, angle: f64| {
            let frame = cfg.frame(steer);
            let local = wrap_pi(angle - frame.boresight_rad);
            let w = steering_vector(cfg.n_elements, frame.steer_local_rad, PI / 2.0).unwrap();
            let u = steering_vector(cfg.n_elements, local, PI / 2.0).unwrap();
            let a = amplitude_vector(cfg.n_elements);
            let mut ip = Complex64::new(0.0, 0.0);
            for k in 0..cfg.n_elements {
                ip += a[k] * w[k].conj() * u[k];
            }
            let f = db_to_linear(element_gain(cfg.pattern, 90.0, local.to_degrees()).unwrap()).sqrt();
            ip * f
        };
        let mut total = Complex64::new(0.0, 0.0);
        for c in &cs.clusters {
            for s in &c.subpaths {
                let g = Complex64::new(0.0, s.phase).exp() * s.power.sqrt();
                total += g * side_vectors(rx, rx_steer, s.aoa) * side_vectors(tx, tx_steer, s.aod).conj();
            }
        }
        total.norm_sqr()
    }

    #[test]
    fn single_path_examples() {
        let cs = ClusterSet::single_path(0.3, 0.3 + PI);
        assert_relative_eq!(link_gain(&cs, &iso(1), &iso(1), 0.3, 0.3 + PI), 1.0, epsilon = 1e-12);
        assert_relative_eq!(link_gain(&cs, &iso(4), &iso(4), 0.3, 0.3 + PI), 16.0, epsilon = 1e-9);
        assert_relative_eq!(naive_link_gain(&cs, &iso(4), &iso(4), 0.3, 0.3 + PI), 16.0, epsilon = 1e-9);
        // matched single path on both boresights: product of the peak array gains
        let cs = ClusterSet::single_path(0.0, 0.0);
        let peak = db_to_linear(8.0 + 10.0 * 64f64.log10()) * db_to_linear(8.0 + 10.0 * 16f64.log10());
        assert_relative_eq!(link_gain(&cs, &tgpp(64), &tgpp(16), 0.0, 0.0), peak, max_relative = 1e-9);
        // arrival from behind lands on a sector edge, 60 degrees off boresight
        let cs = ClusterSet::single_path(0.0, PI);
        let edge = db_to_linear(8.0 + 10.0 * 64f64.log10()) * db_to_linear(8.0 - 12.0 * (60.0f64 / 65.0).powi(2) + 10.0 * 16f64.log10());
        assert_relative_eq!(link_gain(&cs, &tgpp(64), &tgpp(16), 0.0, PI), edge, max_relative = 1e-9);
    }

    #[test]
    fn matches_naive_double_sum() {
        let params = ChannelParams::default();
        for (i, (tx, rx)) in [(iso(16), iso(4)), (tgpp(64), tgpp(16)), (iso(256), tgpp(64)), (tgpp(4), iso(4))].iter().enumerate() {
            for j in 0..25u64 {
                let mut rng = stream(11, i as u64 * 100 + j, 0);
                let los = rng.random_range(-PI..PI);
                let cs = sample_cluster_set(los, &params, &mut rng);
                let ts = rng.random_range(-PI..PI);
                let rs = rng.random_range(-PI..PI);
                let fast = link_gain(&cs, tx, rx, ts, rs);
                let slow = naive_link_gain(&cs, tx, rx, ts, rs);
                assert!((fast - slow).abs() <= 1e-10 * slow.max(1e-300) + 1e-280, "{fast} vs {slow}");
            }
        }
    }

    #[test]
    fn power_scaling_is_exact() {
        let mut rng = stream(3, 0, 0);
        let cs = sample_cluster_set(0.4, &ChannelParams::default(), &mut rng);
        let mut scaled = cs.clone();
        for s in scaled.clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
            s.power *= 7.5;
        }
        let g = link_gain(&cs, &iso(64), &iso(16), 0.4, 0.4 + PI);
        let gs = link_gain(&scaled, &iso(64), &iso(16), 0.4, 0.4 + PI);
        assert_relative_eq!(gs, 7.5 * g, max_relative = 1e-12);
    }

    #[test]
    fn iso_mirror_and_threegpp_sector_rotation() {
        let params = ChannelParams::default();
        for j in 0..50u64 {
            let mut rng = stream(5, j, 0);
            let los = rng.random_range(-PI..PI);
            let cs = sample_cluster_set(los, &params, &mut rng);
            let (ts, rs) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));

            // a broadside panel cannot tell phi from pi - phi
            let mirrored = ClusterSet {
                clusters: cs
                    .clusters
                    .iter()
                    .map(|c| Cluster {
                        angle_tx: PI - c.angle_tx,
                        angle_rx: PI - c.angle_rx,
                        subpaths: c.subpaths.iter().map(|s| Subpath { aod: PI - s.aod, aoa: PI - s.aoa, ..*s }).collect(),
                    })
                    .collect(),
            };
            let g = link_gain(&cs, &iso(64), &iso(16), ts, rs);
            let gm = link_gain(&mirrored, &iso(64), &iso(16), PI - ts, PI - rs);
            assert!((g - gm).abs() <= 1e-9 * g.max(1e-300));

            // three sectors repeat every 120 degrees
            let delta = 2.0 * PI / 3.0;
            let g = link_gain(&cs, &tgpp(64), &tgpp(16), ts, rs);
            let gr = link_gain(&cs.rotated(delta), &tgpp(64), &tgpp(16), ts + delta, rs + delta);
            assert!((g - gr).abs() <= 1e-9 * g.max(1e-300), "{g} vs {gr}");
        }
    }

    #[test]
    fn cluster_set_structure() {
        let params = ChannelParams::default();
        let mut rng = stream(9, 0, 0);
        for _ in 0..2000 {
            let los = rng.random_range(-PI..PI);
            let cs = sample_cluster_set(los, &params, &mut rng);
            assert!(cs.k_clusters() >= 1);
            assert_eq!(cs.clusters[0].angle_tx, los);
            assert_relative_eq!(cs.total_power(), 1.0, epsilon = 1e-12);
            for c in &cs.clusters {
                assert!((1..=10).contains(&c.subpaths.len()));
                for s in &c.subpaths {
                    assert!((s.aod - c.angle_tx).abs() >= 0.0122 / 2.0 - 1e-15);
                    assert!((s.aoa - c.angle_rx).abs() >= 0.0122 / 2.0 - 1e-15);
                }
            }
        }
    }

    #[test]
    fn mean_cluster_count() {
        // E[max(N, 1)] for N ~ Poisson(1.8), summed term by term
        let lam: f64 = 1.8;
        let mut pmf = (-lam).exp();
        let mut oracle = pmf;
        for k in 1..200 {
            pmf *= lam / k as f64;
            oracle += k as f64 * pmf;
        }
        let params = ChannelParams::default();
        let n = 100_000;
        let mut rng = stream(21, 0, 0);
        let mean = (0..n).map(|_| sample_cluster_set(0.0, &params, &mut rng).k_clusters() as f64).sum::<f64>() / n as f64;
        // standard deviation of max(N, 1) is about 1.2
        assert!((mean - oracle).abs() < 4.0 * 1.2 / (n as f64).sqrt(), "{mean} vs {oracle}");
    }

    #[test]
    fn misaligned_mean_below_aligned() {
        let params = ChannelParams::default();
        for (tx, rx) in [(iso(64), iso(16)), (tgpp(64), tgpp(16))] {
            let n = 4000;
            let mut ra = stream(13, 0, 1);
            let mut rm = stream(13, 0, 2);
            let a: f64 = (0..n).map(|_| aligned_gain(&mut ra, &tx, &rx, &params).value).sum::<f64>() / n as f64;
            let m: f64 = (0..n).map(|_| misaligned_gain(&mut rm, &tx, &rx, &params).value).sum::<f64>() / n as f64;
            assert!(m < a, "misaligned {m} aligned {a}");
        }
        let mut rng = stream(1, 0, 0);
        assert_eq!(aligned_gain(&mut rng, &iso(4), &iso(4), &params).kind, GainKind::Aligned);
        assert_eq!(misaligned_gain(&mut rng, &iso(4), &iso(4), &params).kind, GainKind::Misaligned);
    }
}
