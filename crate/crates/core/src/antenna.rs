//! Antenna element patterns, uniform planar arrays and their beam patterns.
//!
//! Arrays are square `sqrt(n) x sqrt(n)` panels with half-wavelength spacing
//! lying in the vertical plane. Only azimuth is evaluated; the elevation is
//! pinned at 90 degrees, so the vertical dimension always adds coherently and
//! the azimuth pattern is that of a `sqrt(n)`-element horizontal line array
//! scaled to a peak of `n`.
//!
//! Angle frames: an [`ElementPattern::Iso`] panel has a fixed orientation
//! with broadside along the global x-axis. A [`ElementPattern::ThreeGpp`]
//! site carries three panels with boresights at 0, 120 and -120 degrees and
//! uses the one whose sector contains the steering direction
//! ([`sector_map`]); all angles are then taken relative to that boresight.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, linear_to_db, NULL_FLOOR_DB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementPattern {
    Iso,
    #[serde(rename = "3gpp", alias = "three_gpp", alias = "threegpp")]
    ThreeGpp,
}

impl ElementPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementPattern::Iso => "iso",
            ElementPattern::ThreeGpp => "3gpp",
        }
    }
}

impl std::fmt::Display for ElementPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ElementPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iso" => Ok(ElementPattern::Iso),
            "3gpp" | "threegpp" | "three_gpp" => Ok(ElementPattern::ThreeGpp),
            other => Err(Error::invalid(format!("unknown element pattern `{other}` (expected iso or 3gpp)"))),
        }
    }
}

/// Directional element constants (3 dB beamwidths, side-lobe limits, peak gain).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElementParams {
    pub theta_3db_deg: f64,
    pub phi_3db_deg: f64,
    pub sla_v_db: f64,
    pub a_m_db: f64,
    pub g_max_dbi: f64,
    pub polarization_slant_deg: f64,
}

impl Default for ElementParams {
    fn default() -> Self {
        ElementParams {
            theta_3db_deg: 65.0,
            phi_3db_deg: 65.0,
            sla_v_db: 30.0,
            a_m_db: 30.0,
            g_max_dbi: 8.0,
            polarization_slant_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub pattern: ElementPattern,
    pub n_elements: usize,
    pub element_spacing_wavelengths: f64,
    pub element: ElementParams,
}

impl ArrayConfig {
    pub fn new(pattern: ElementPattern, n_elements: usize) -> Result<Self> {
        let cfg = ArrayConfig { pattern, n_elements, element_spacing_wavelengths: 0.5, element: ElementParams::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        side_length(self.n_elements)?;
        if !(self.element_spacing_wavelengths > 0.0) || !self.element_spacing_wavelengths.is_finite() {
            return Err(Error::invalid("element spacing must be positive"));
        }
        Ok(())
    }

    /// Elements per row (and per column).
    pub fn side(&self) -> usize {
        isqrt(self.n_elements)
    }

    pub fn element_gain_db(&self, theta_deg: f64, phi_deg: f64) -> Result<f64> {
        check_angles(theta_deg, phi_deg)?;
        Ok(element_gain_unchecked(self.pattern, &self.element, theta_deg, phi_deg))
    }

    /// Local frame of a beam steered towards global azimuth `steer_rad`.
    pub fn frame(&self, steer_rad: f64) -> BeamFrame {
        match self.pattern {
            ElementPattern::Iso => BeamFrame { boresight_rad: 0.0, steer_local_rad: wrap_pi(steer_rad) },
            ElementPattern::ThreeGpp => {
                let s = sector_map(steer_rad.to_degrees());
                BeamFrame { boresight_rad: s.boresight_deg.to_radians(), steer_local_rad: s.local_deg.to_radians() }
            }
        }
    }

    /// Field amplitude of one element towards local azimuth `local_rad`
    /// (elevation 90 degrees).
    #[inline]
    pub fn element_field(&self, local_rad: f64) -> f64 {
        match self.pattern {
            ElementPattern::Iso => 1.0,
            ElementPattern::ThreeGpp => {
                let g = element_gain_unchecked(self.pattern, &self.element, 90.0, wrap_pi(local_rad).to_degrees());
                field_pattern_with_slant(g, self.element.polarization_slant_deg)
            }
        }
    }

    /// Normalized beam response `(1/sqrt n) sum_k conj(w_k(steer)) u_k(path)`
    /// for local azimuths, in closed form. Its squared modulus is the linear
    /// array factor and peaks at `n`.
    #[inline]
    pub fn beam_response(&self, steer_local_rad: f64, path_local_rad: f64) -> Complex64 {
        let x = 2.0 * PI * self.element_spacing_wavelengths * (path_local_rad.sin() - steer_local_rad.sin());
        dirichlet(self.side(), x)
    }

    /// Array gain in dB towards global azimuth `eval_rad` for a beam steered
    /// at global azimuth `steer_rad`: element gain plus array factor.
    pub fn array_gain_db(&self, steer_rad: f64, eval_rad: f64) -> Result<f64> {
        let frame = self.frame(steer_rad);
        let eval_local = wrap_pi(eval_rad - frame.boresight_rad);
        let element = element_gain_unchecked(self.pattern, &self.element, 90.0, eval_local.to_degrees());
        let w = steering_vector_spaced(self.n_elements, frame.steer_local_rad, PI / 2.0, self.element_spacing_wavelengths)?;
        let u = steering_vector_spaced(self.n_elements, eval_local, PI / 2.0, self.element_spacing_wavelengths)?;
        let combined: Vec<Complex64> = w.iter().zip(&u).map(|(w, u)| u.conj() * w).collect();
        Ok(element + array_factor_db(&amplitude_vector(self.n_elements), &combined)?)
    }
}

/// Steering geometry of one beam in its panel's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFrame {
    pub boresight_rad: f64,
    pub steer_local_rad: f64,
}

impl BeamFrame {
    pub fn local(&self, global_rad: f64) -> f64 {
        wrap_pi(global_rad - self.boresight_rad)
    }
}

fn isqrt(n: usize) -> usize {
    let mut s = (n as f64).sqrt().round() as usize;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

fn side_length(n: usize) -> Result<usize> {
    let s = isqrt(n);
    if n == 0 || s * s != n {
        return Err(Error::invalid(format!("element count {n} is not a positive perfect square")));
    }
    Ok(s)
}

fn check_angles(theta_deg: f64, phi_deg: f64) -> Result<()> {
    if !(0.0..=180.0).contains(&theta_deg) {
        return Err(Error::invalid(format!("elevation {theta_deg} outside [0, 180] degrees")));
    }
    if !(-180.0..=180.0).contains(&phi_deg) {
        return Err(Error::invalid(format!("azimuth {phi_deg} outside [-180, 180] degrees")));
    }
    Ok(())
}

/// Wraps an angle in radians to (-pi, pi].
#[inline]
pub fn wrap_pi(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn element_gain_unchecked(pattern: ElementPattern, p: &ElementParams, theta_deg: f64, phi_deg: f64) -> f64 {
    match pattern {
        ElementPattern::Iso => 0.0,
        ElementPattern::ThreeGpp => {
            let vertical = -(12.0 * ((theta_deg - 90.0) / p.theta_3db_deg).powi(2)).min(p.sla_v_db);
            let horizontal = -(12.0 * (phi_deg / p.phi_3db_deg).powi(2)).min(p.a_m_db);
            p.g_max_dbi - (-(vertical + horizontal)).min(p.a_m_db)
        }
    }
}

/// Element gain in dB with the default 3GPP constants.
pub fn element_gain(pattern: ElementPattern, theta_deg: f64, phi_deg: f64) -> Result<f64> {
    check_angles(theta_deg, phi_deg)?;
    Ok(element_gain_unchecked(pattern, &ElementParams::default(), theta_deg, phi_deg))
}

/// Beamforming vector of an `n`-element square panel with half-wavelength
/// spacing; `w[(p-1) sqrt(n) + (r-1)]` has phase
/// `pi ((p-1) cos(theta) + (r-1) sin(theta) sin(phi))`.
pub fn steering_vector(n: usize, phi_rad: f64, theta_rad: f64) -> Result<Vec<Complex64>> {
    steering_vector_spaced(n, phi_rad, theta_rad, 0.5)
}

pub fn steering_vector_spaced(n: usize, phi_rad: f64, theta_rad: f64, spacing_wavelengths: f64) -> Result<Vec<Complex64>> {
    let side = side_length(n)?;
    let psi_v = theta_rad.cos();
    let psi_h = theta_rad.sin() * phi_rad.sin();
    let k = 2.0 * PI * spacing_wavelengths;
    let mut w = Vec::with_capacity(n);
    for p in 0..side {
        for r in 0..side {
            let phase = k * (p as f64 * psi_v + r as f64 * psi_h);
            w.push(Complex64::from_polar(1.0, phase));
        }
    }
    Ok(w)
}

/// Uniform amplitude taper `1/sqrt(n)`.
pub fn amplitude_vector(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n]
}

/// Array factor `10 log10(1 + rho (|a . w|^2 - 1))` with unit correlation
/// `rho`, i.e. `10 log10 |a . w|^2`. `w` is the beamforming vector already
/// multiplied by the conjugate spatial signature of the evaluation angle.
/// A perfect null returns `-inf`.
pub fn array_factor_db(a: &[Complex64], w: &[Complex64]) -> Result<f64> {
    if a.len() != w.len() {
        return Err(Error::invalid(format!("amplitude vector has {} entries, beam vector {}", a.len(), w.len())));
    }
    const RHO: f64 = 1.0;
    let s: Complex64 = a.iter().zip(w).map(|(a, w)| a * w).sum();
    let af = 1.0 + RHO * (s.norm_sqr() - 1.0);
    // cancellation leaves round-off noise where the sum is exactly zero
    if af <= 1e-28 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(linear_to_db(af))
}

/// Vertical field amplitude `sqrt(A) cos(zeta)` of a gain given in dB.
pub fn field_pattern(gain_db: f64) -> f64 {
    field_pattern_with_slant(gain_db, 0.0)
}

pub fn field_pattern_with_slant(gain_db: f64, slant_deg: f64) -> f64 {
    if gain_db == f64::NEG_INFINITY {
        return 0.0;
    }
    db_to_linear(gain_db).sqrt() * slant_deg.to_radians().cos()
}

/// Sum of `exp(j r x)` for `r = 0..n`.
#[inline]
pub fn dirichlet(n: usize, x: f64) -> Complex64 {
    let half = 0.5 * x;
    let den = half.sin();
    if den.abs() < 1e-9 {
        return (0..n).map(|r| Complex64::from_polar(1.0, r as f64 * x)).sum();
    }
    let mag = (n as f64 * half).sin() / den;
    Complex64::from_polar(mag, (n as f64 - 1.0) * half)
}

/// An azimuth expressed in the frame of one of three 120-degree sectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorAngle {
    pub sector: usize,
    pub boresight_deg: f64,
    /// Angle from the sector boresight, within [-60, 60].
    pub local_deg: f64,
}

const SECTOR_BORESIGHTS_DEG: [f64; 3] = [-120.0, 0.0, 120.0];

fn wrap_deg(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Folds an azimuth into the nearest sector. At a boundary the sector with
/// the lower boresight (in -120, 0, 120 order) wins.
pub fn sector_map(phi_deg: f64) -> SectorAngle {
    let mut best = SectorAngle { sector: 0, boresight_deg: SECTOR_BORESIGHTS_DEG[0], local_deg: wrap_deg(phi_deg - SECTOR_BORESIGHTS_DEG[0]) };
    for (i, &b) in SECTOR_BORESIGHTS_DEG.iter().enumerate().skip(1) {
        let local = wrap_deg(phi_deg - b);
        if local.abs() < best.local_deg.abs() - 1e-12 {
            best = SectorAngle { sector: i, boresight_deg: b, local_deg: local };
        }
    }
    best
}

/// `(azimuth_deg, gain_db)` over a full turn, nulls floored at -400 dB.
pub fn pattern_table(config: &ArrayConfig, steer_deg: f64, step_deg: f64) -> Result<Vec<(f64, f64)>> {
    if !(step_deg > 0.0) {
        return Err(Error::invalid("pattern step must be positive"));
    }
    let n = (360.0 / step_deg).round() as usize;
    (0..=n)
        .map(|i| {
            let phi = -180.0 + i as f64 * step_deg;
            let g = config.array_gain_db(steer_deg.to_radians(), phi.to_radians())?;
            Ok((phi, g.max(NULL_FLOOR_DB)))
        })
        .collect()
}

pub fn write_pattern_csv<W: Write>(out: W, rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eval_phi_deg", "gain_db"])?;
    for (phi, g) in rows {
        w.write_record([phi.to_string(), g.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
