//! Base-station field around a typical user at the origin: Poisson
//! placement, LoS/NLoS blockage states, path loss and minimum-path-loss
//! association.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::dbm_to_mw;

/// LoS probability decay constant of the 28 GHz blockage model, per metre.
pub const DEFAULT_LOS_DECAY_PER_M: f64 = 0.0149;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    pub fn other(self) -> LinkState {
        match self {
            LinkState::Los => LinkState::Nlos,
            LinkState::Nlos => LinkState::Los,
        }
    }

    /// Probability of this state at distance `r_m`.
    pub fn probability(self, r_m: f64, decay_per_m: f64) -> f64 {
        let p_los = (-decay_per_m * r_m).exp();
        match self {
            LinkState::Los => p_los,
            LinkState::Nlos => -(-decay_per_m * r_m).exp_m1(),
        }
    }
}

/// Close-in path loss `beta * r^-alpha` per state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossParams {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta_los: f64,
    pub beta_nlos: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        PathLossParams {
            alpha_los: 2.0,
            alpha_nlos: 2.92,
            beta_los: 10f64.powf(-7.2),
            beta_nlos: 10f64.powf(-6.14),
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha_los, self.alpha_nlos, self.beta_los, self.beta_nlos];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::invalid("path-loss exponents and intercepts must be positive"));
        }
        if self.alpha_nlos < self.alpha_los {
            return Err(Error::invalid("alpha_nlos must not be smaller than alpha_los"));
        }
        Ok(())
    }

    pub fn alpha(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.alpha_los,
            LinkState::Nlos => self.alpha_nlos,
        }
    }

    pub fn beta(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.beta_los,
            LinkState::Nlos => self.beta_nlos,
        }
    }

    /// `beta * r^-alpha` without argument checks; `r` must be positive.
    #[inline]
    pub fn gain(&self, r_m: f64, state: LinkState) -> f64 {
        self.beta(state) * r_m.powf(-self.alpha(state))
    }

    /// Distance at which a link in state `to` has the same path loss as a
    /// link in state `from` at distance `r_m`.
    pub fn equivalent_distance(&self, r_m: f64, from: LinkState, to: LinkState) -> f64 {
        (self.beta(to) * r_m.powf(self.alpha(from)) / self.beta(from)).powf(1.0 / self.alpha(to))
    }
}

/// Radio and deployment parameters of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub bs_density_per_km2: f64,
    /// Thermal noise density; no receiver noise figure is applied.
    pub noise_psd_dbm_per_hz: f64,
    pub los_decay_per_m: f64,
    /// Radius of the simulated disc. Interference from beyond it is ignored.
    pub region_radius_m: f64,
    pub pathloss: PathLossParams,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            carrier_freq_hz: 28e9,
            bandwidth_hz: 500e6,
            tx_power_dbm: 30.0,
            bs_density_per_km2: 100.0,
            noise_psd_dbm_per_hz: -174.0,
            los_decay_per_m: DEFAULT_LOS_DECAY_PER_M,
            region_radius_m: 2000.0,
            pathloss: PathLossParams::default(),
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("bs_density_per_km2", self.bs_density_per_km2),
            ("los_decay_per_m", self.los_decay_per_m),
            ("region_radius_m", self.region_radius_m),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.tx_power_dbm.is_finite() || !self.noise_psd_dbm_per_hz.is_finite() {
            return Err(Error::invalid("tx_power_dbm and noise_psd_dbm_per_hz must be finite"));
        }
        self.pathloss.validate()?;
        let s2 = self.noise_power_normalized();
        if !(s2.is_finite() && s2 > 0.0) {
            return Err(Error::invalid("normalized noise power is not finite and positive"));
        }
        Ok(())
    }

    pub fn density_per_m2(&self) -> f64 {
        self.bs_density_per_km2 * 1e-6
    }

    /// Noise power over the band divided by the transmit power (linear).
    pub fn noise_power_normalized(&self) -> f64 {
        let noise_mw = dbm_to_mw(self.noise_psd_dbm_per_hz) * self.bandwidth_hz;
        noise_mw / dbm_to_mw(self.tx_power_dbm)
    }

    pub fn wavelength_m(&self) -> f64 {
        299_792_458.0 / self.carrier_freq_hz
    }

    pub fn los_probability(&self, r_m: f64) -> Result<f64> {
        los_probability(r_m, self.los_decay_per_m)
    }
}

/// Probability that a link of length `r_m` is line-of-sight, `exp(-decay r)`.
pub fn los_probability(r_m: f64, decay_per_m: f64) -> Result<f64> {
    if !(r_m >= 0.0) || !r_m.is_finite() {
        return Err(Error::invalid(format!("distance must be finite and non-negative, got {r_m}")));
    }
    Ok(LinkState::Los.probability(r_m, decay_per_m))
}

/// Linear path gain `beta_state * r^-alpha_state`.
pub fn path_loss(r_m: f64, state: LinkState, params: &PathLossParams) -> Result<f64> {
    if !(r_m > 0.0) || !r_m.is_finite() {
        return Err(Error::invalid(format!("path loss needs a positive finite distance, got {r_m}")));
    }
    Ok(params.gain(r_m, state))
}

fn check_density_radius(density_per_m2: f64, radius_m: f64) -> Result<()> {
    if !(density_per_m2 > 0.0) || !density_per_m2.is_finite() {
        return Err(Error::invalid(format!("density must be positive and finite, got {density_per_m2}")));
    }
    if !(radius_m > 0.0) || !radius_m.is_finite() {
        return Err(Error::invalid(format!("radius must be positive and finite, got {radius_m}")));
    }
    Ok(())
}

/// Homogeneous Poisson points on the disc of radius `radius_m` at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(density_per_m2: f64, radius_m: f64, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    check_density_radius(density_per_m2, radius_m)?;
    sample_ppp_annulus(density_per_m2, 0.0, radius_m, rng)
}

/// Homogeneous Poisson points on the annulus `inner_m <= |x| < outer_m`.
pub fn sample_ppp_annulus<R: Rng + ?Sized>(
    density_per_m2: f64,
    inner_m: f64,
    outer_m: f64,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    check_density_radius(density_per_m2, outer_m)?;
    if !(inner_m >= 0.0 && inner_m < outer_m) {
        return Err(Error::invalid("annulus needs 0 <= inner < outer"));
    }
    let (a2, b2) = (inner_m * inner_m, outer_m * outer_m);
    let mean = density_per_m2 * PI * (b2 - a2);
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok((0..count)
        .map(|_| {
            let r = (a2 + rng.random::<f64>() * (b2 - a2)).sqrt();
            let t = 2.0 * PI * rng.random::<f64>();
            [r * t.cos(), r * t.sin()]
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub x_m: f64,
    pub y_m: f64,
    pub state: LinkState,
}

impl BaseStation {
    pub fn distance_m(&self) -> f64 {
        self.x_m.hypot(self.y_m)
    }

    /// Direction from the origin to the station, radians in (-pi, pi].
    pub fn azimuth(&self) -> f64 {
        self.y_m.atan2(self.x_m)
    }
}

/// Marks each point LoS independently with probability `exp(-decay |x|)`.
pub fn assign_states<R: Rng + ?Sized>(points: &[[f64; 2]], decay_per_m: f64, rng: &mut R) -> Vec<BaseStation> {
    points
        .iter()
        .map(|&[x, y]| {
            let p_los = LinkState::Los.probability(x.hypot(y), decay_per_m);
            let state = if rng.random::<f64>() < p_los { LinkState::Los } else { LinkState::Nlos };
            BaseStation { x_m: x, y_m: y, state }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub serving_index: usize,
    pub serving_state: LinkState,
    pub serving_distance_m: f64,
    pub path_gain: f64,
}

/// Picks the station with the largest path gain. Ties go to the lowest index.
pub fn associate(stations: &[BaseStation], params: &PathLossParams) -> Result<Association> {
    let mut best: Option<Association> = None;
    for (i, bs) in stations.iter().enumerate() {
        let r = bs.distance_m();
        let g = if r > 0.0 { params.gain(r, bs.state) } else { f64::INFINITY };
        if best.is_none_or(|b| g > b.path_gain) {
            best = Some(Association { serving_index: i, serving_state: bs.state, serving_distance_m: r, path_gain: g });
        }
    }
    best.ok_or(Error::EmptySnapshot)
}

/// A placed and associated base-station field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub stations: Vec<BaseStation>,
    pub association: Association,
}

impl NetworkSnapshot {
    pub fn new(stations: Vec<BaseStation>, params: &PathLossParams) -> Result<Self> {
        let association = associate(&stations, params)?;
        Ok(NetworkSnapshot { stations, association })
    }

    pub fn serving(&self) -> &BaseStation {
        &self.stations[self.association.serving_index]
    }
}
