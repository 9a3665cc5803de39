use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mmwave_coverage::analytic::QuadratureSpec;
use mmwave_coverage::antenna::{ArrayConfig, ElementParams, ElementPattern};
use mmwave_coverage::channel::ChannelParams;
use mmwave_coverage::curve::validate_grid;
use mmwave_coverage::gains::{BinSpec, Family, GainDistribution};
use mmwave_coverage::geometry::NetworkConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    /// Not part of the digest.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub antenna: AntennaSection,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub thresholds: ThresholdSection,
    #[serde(default)]
    pub harvest: HarvestSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub analytic: AnalyticSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AntennaSection {
    pub pattern: ElementPattern,
    pub n_tx: usize,
    pub n_rx: usize,
    pub element_spacing_wavelengths: f64,
    pub element: ElementParams,
}

impl Default for AntennaSection {
    fn default() -> Self {
        AntennaSection { pattern: ElementPattern::Iso, n_tx: 256, n_rx: 64, element_spacing_wavelengths: 0.5, element: ElementParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_snapshots: usize,
    pub annulus_width_m: f64,
    /// Replaces the normalized noise power.
    pub noise_override: Option<f64>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection { n_snapshots: 10_000, annulus_width_m: 500.0, noise_override: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection { min_db: -10.0, max_db: 30.0, step_db: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarvestSection {
    pub n_samples: usize,
}

impl Default for HarvestSection {
    fn default() -> Self {
        HarvestSection { n_samples: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub families: Vec<Family>,
    pub bins: BinSpec,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection { families: Family::ALL.to_vec(), bins: BinSpec::default() }
    }
}

/// Gain laws for the analytic curves. Unset laws come from the published
/// per-size tables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticSection {
    pub aligned: Option<GainDistribution>,
    pub misaligned: Option<GainDistribution>,
    pub quadrature: QuadratureSpec,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(format!("config is not valid TOML: {e}")))?;
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("config key `{path}`: {}", e.inner().message().trim()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let at = |key: &'static str| move |e: mmwave_coverage::Error| CliError::Config(format!("config key `{key}`: {e}"));
        self.network.validate().map_err(at("network"))?;
        self.tx_array().map_err(at("antenna.n_tx"))?;
        self.rx_array().map_err(at("antenna.n_rx"))?;
        self.channel.validate().map_err(at("channel"))?;
        validate_grid(&self.threshold_grid()).map_err(at("thresholds"))?;
        if self.simulation.n_snapshots == 0 {
            return Err(CliError::Config("config key `simulation.n_snapshots`: must be at least 1".into()));
        }
        if self.fit.families.is_empty() {
            return Err(CliError::Config("config key `fit.families`: list at least one family".into()));
        }
        self.fit.bins.validate().map_err(at("fit.bins"))?;
        self.analytic.quadrature.validate().map_err(at("analytic.quadrature"))?;
        Ok(())
    }

    fn array(&self, n: usize) -> mmwave_coverage::Result<ArrayConfig> {
        let a = ArrayConfig {
            pattern: self.antenna.pattern,
            n_elements: n,
            element_spacing_wavelengths: self.antenna.element_spacing_wavelengths,
            element: self.antenna.element,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn tx_array(&self) -> mmwave_coverage::Result<ArrayConfig> {
        self.array(self.antenna.n_tx)
    }

    pub fn rx_array(&self) -> mmwave_coverage::Result<ArrayConfig> {
        self.array(self.antenna.n_rx)
    }

    /// `min_db`, `min_db + step_db`, ... up to `max_db` inclusive.
    pub fn threshold_grid(&self) -> Vec<f64> {
        let t = &self.thresholds;
        if !(t.step_db > 0.0) || !(t.max_db >= t.min_db) {
            return Vec::new();
        }
        let n = ((t.max_db - t.min_db) / t.step_db + 1e-9).floor() as usize + 1;
        (0..n).map(|k| t.min_db + k as f64 * t.step_db).collect()
    }

    /// SHA-256 of the canonical JSON form, without `output_dir`. Key order in
    /// the source file does not matter.
    pub fn digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("output_dir");
        }
        digest_bytes(canonical_json(&v).as_bytes())
    }
}

/// Sorted-key compact JSON.
pub fn canonical_json(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let body: Vec<String> =
                keys.iter().map(|k| format!("{}:{}", serde_json::Value::String((*k).clone()), canonical_json(&map[*k]))).collect();
            format!("{{{}}}", body.join(","))
        }
        serde_json::Value::Array(items) => format!("[{}]", items.iter().map(canonical_json).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
