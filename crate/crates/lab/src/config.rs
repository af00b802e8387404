//! Run configuration: one TOML document, unknown keys rejected.
//!
//! ```toml
//! seed = 1
//! realizations = 20
//!
//! [lattice]
//! dimension = 1
//! linear_size = 8
//! boundary = "dirichlet"      # or "periodic"
//!
//! [disorder]
//! lambda = 1.0
//! v_minus = -1.0              # uniform single-site law on [v_minus, v_plus]
//! v_plus = 1.0
//!
//! [thermo]
//! temperature = 1.0
//! fermi_level = 0.0
//! ```
//!
//! Optional tables: `[bins]`, `[pulse]`, `[sweep]`, `[verify]`; see the
//! README for every key.

use std::path::Path;

use acsigma_core::bins::BinGrid;
use acsigma_core::disorder::{spectral_bounds, DisorderSpec, SiteDistribution};
use acsigma_core::lattice::{Boundary, LatticeSpec};
use acsigma_core::response::{ExtractionSpec, FieldPulse, TimeSpec};
use acsigma_core::thermo::ThermoParams;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    pub lattice: LatticeConfig,
    pub disorder: DisorderConfig,
    pub thermo: ThermoConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<BinsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_realizations() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConfig {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dimension: usize,
    pub linear_size: usize,
    pub boundary: BoundaryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub lambda: f64,
    #[serde(default = "default_v_minus")]
    pub v_minus: f64,
    #[serde(default = "default_v_plus")]
    pub v_plus: f64,
}

fn default_v_minus() -> f64 {
    -1.0
}

fn default_v_plus() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoConfig {
    pub temperature: f64,
    pub fermi_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsConfig {
    /// Frequency bin width; the model default (E₊−E₋)/⌈2√|Λ|⌉ when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub amplitude: f64,
    pub width: f64,
    pub carrier: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_step_norm_product")]
    pub step_norm_product: f64,
    /// Bin width for the measure route.
    #[serde(default = "default_absorb_width")]
    pub frequency_width: f64,
}

fn default_alphas() -> Vec<f64> {
    vec![0.1, 0.05, 0.02, 0.01]
}

fn default_step_norm_product() -> f64 {
    0.05
}

fn default_absorb_width() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Smallest λ included in the log-log slope fit.
    #[serde(default = "default_slope_from")]
    pub slope_from: f64,
}

fn default_slope_from() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Flip the sign of every pair weight before binning.
    NegatedPairWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    /// Realizations used by the per-realization identity checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_realizations: Option<usize>,
}

/// The validated, typed form of a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub lattice: LatticeSpec,
    pub disorder: DisorderSpec,
    pub thermo: ThermoParams,
    pub frequency_width: Option<f64>,
    pub pulse: Option<(FieldPulse, Vec<f64>, ExtractionSpec, f64)>,
    pub realizations: usize,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config {
            field: None,
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is plain data")
    }

    /// Checks every field and builds the core types; errors name the field.
    pub fn resolve(&self) -> Result<Resolved, LabError> {
        let boundary = match self.lattice.boundary {
            BoundaryConfig::Periodic => Boundary::Periodic,
            BoundaryConfig::Dirichlet => Boundary::Dirichlet,
        };
        let lattice = LatticeSpec::new(self.lattice.dimension, self.lattice.linear_size, boundary)?;
        let distribution = SiteDistribution::Uniform {
            v_minus: self.disorder.v_minus,
            v_plus: self.disorder.v_plus,
        };
        let disorder = DisorderSpec::new(distribution, self.disorder.lambda, self.seed)?;
        let thermo = ThermoParams::new(self.thermo.temperature, self.thermo.fermi_level)?;
        if self.realizations < 2 {
            return Err(LabError::at("realizations", "need at least 2"));
        }
        let frequency_width = self.bins.as_ref().and_then(|b| b.frequency_width);
        if let Some(w) = frequency_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(LabError::at("bins.frequency_width", "must be positive"));
            }
        }
        let pulse = match &self.pulse {
            None => None,
            Some(pc) => {
                let pulse = FieldPulse::gaussian_cosine(pc.amplitude, pc.width, pc.carrier)?;
                if !(pc.step_norm_product > 0.0) {
                    return Err(LabError::at("pulse.step_norm_product", "must be positive"));
                }
                if !(pc.frequency_width > 0.0) {
                    return Err(LabError::at("pulse.frequency_width", "must be positive"));
                }
                let spec = ExtractionSpec {
                    time: TimeSpec {
                        step_norm_product: pc.step_norm_product,
                        ..TimeSpec::default()
                    },
                    ..ExtractionSpec::default()
                };
                Some((pulse, pc.alphas.clone(), spec, pc.frequency_width))
            }
        };
        if let Some(sweep) = &self.sweep {
            if sweep.temperatures.as_ref().is_some_and(|t| t.is_empty()) {
                return Err(LabError::at("sweep.temperatures", "empty grid"));
            }
            if sweep.lambdas.as_ref().is_some_and(|l| l.is_empty()) {
                return Err(LabError::at("sweep.lambdas", "empty grid"));
            }
        }
        Ok(Resolved {
            lattice,
            disorder,
            thermo,
            frequency_width,
            pulse,
            realizations: self.realizations,
        })
    }
}

impl Resolved {
    /// Frequency grid shared by every realization of the run.
    pub fn frequency_grid(&self) -> Result<BinGrid, LabError> {
        let bounds = spectral_bounds(&self.disorder, &self.lattice);
        let grid = match self.frequency_width {
            None => BinGrid::default_frequency(bounds, self.lattice.site_count())?,
            Some(w) => {
                let half = ((bounds.1 - bounds.0) / w).ceil() as usize;
                BinGrid::centered(w, half)?
            }
        };
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
realizations = 4
[lattice]
dimension = 1
linear_size = 8
boundary = "periodic"
[disorder]
lambda = 1.0
[thermo]
temperature = 1.0
fermi_level = 0.0
"#;

    #[test]
    fn minimal_config_resolves() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.lattice.site_count(), 8);
        assert_eq!(r.disorder.seed, 7);
        let back: RunConfig = serde_json::from_value(c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("lambda = 1.0", "lambda = 1.0\nlamda = 2.0");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
    }

    #[test]
    fn invalid_size_names_the_field() {
        let text = MINIMAL.replace("linear_size = 8", "linear_size = 1");
        let err = RunConfig::from_toml(&text).unwrap().resolve().unwrap_err();
        assert_eq!(err.field_name(), Some("lattice.linear_size"));
    }
}
