//! Piece-wise constant main/side-lobe array gains with Rayleigh fading.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::antenna::ElementPattern;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedGainModel {
    pub mainlobe_tx: f64,
    pub mainlobe_rx: f64,
    pub sidelobe_tx: f64,
    pub sidelobe_rx: f64,
    pub beamwidth_tx: f64,
    pub beamwidth_rx: f64,
}

fn side(pattern: ElementPattern, n: usize) -> Result<(f64, f64, f64)> {
    let s = (n as f64).sqrt().round() as usize;
    if s * s != n || n < 4 {
        return Err(Error::invalid(format!("simplified model needs a square array of at least 4 elements, got {n}")));
    }
    let nf = n as f64;
    let main = match pattern {
        ElementPattern::Iso => nf,
        ElementPattern::ThreeGpp => 10f64.powf(0.8) * nf,
    };
    let sine = (3.0 * PI / (2.0 * s as f64)).sin();
    let side = 1.0 / (sine * sine);
    Ok((main, side, (3.0 / nf).sqrt()))
}

/// Main-lobe gain `n` (ISO) or `10^0.8 n` (3GPP), side-lobe gain
/// `1 / sin^2(3 pi / (2 sqrt n))` and half-power beamwidth `sqrt(3 / n)`.
pub fn simplified_model(pattern: ElementPattern, n_tx: usize, n_rx: usize) -> Result<SimplifiedGainModel> {
    let (mainlobe_tx, sidelobe_tx, beamwidth_tx) = side(pattern, n_tx)?;
    let (mainlobe_rx, sidelobe_rx, beamwidth_rx) = side(pattern, n_rx)?;
    Ok(SimplifiedGainModel { mainlobe_tx, mainlobe_rx, sidelobe_tx, sidelobe_rx, beamwidth_tx, beamwidth_rx })
}

impl SimplifiedGainModel {
    /// Mean aligned gain, both main lobes.
    pub fn aligned_mean(&self) -> f64 {
        self.mainlobe_tx * self.mainlobe_rx
    }

    /// The four `(gain, probability)` outcomes of an interfering link.
    pub fn interference_mixture(&self) -> [(f64, f64); 4] {
        let pt = (self.beamwidth_tx / (2.0 * PI)).clamp(0.0, 1.0);
        let pr = (self.beamwidth_rx / (2.0 * PI)).clamp(0.0, 1.0);
        [
            (self.mainlobe_tx * self.mainlobe_rx, pt * pr),
            (self.mainlobe_tx * self.sidelobe_rx, pt * (1.0 - pr)),
            (self.sidelobe_tx * self.mainlobe_rx, (1.0 - pt) * pr),
            (self.sidelobe_tx * self.sidelobe_rx, (1.0 - pt) * (1.0 - pr)),
        ]
    }
}

/// Discrete law of the mean misaligned gain.
pub fn mixed_interference_gain(model: &SimplifiedGainModel) -> [(f64, f64); 4] {
    model.interference_mixture()
}
