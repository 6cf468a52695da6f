//! Fleet, catalog and run parameters loaded from a JSON document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::{check_epsilon, default_epsilon, MetricsError};
use crate::model::{ObjectiveParams, PmSpec, VmType, DEFAULT_BILLING_PERIOD};
use crate::trace::{scale_fleet, FleetConfig, TaskMapping};

/// `(core_count, GHz)` of the bundled 15-PM local fleet.
const DEFAULT_FLEET: [(usize, f64); 15] = [
    (8, 2.4),
    (8, 2.0),
    (6, 3.2),
    (6, 2.6),
    (4, 3.0),
    (4, 2.8),
    (4, 2.2),
    (4, 1.8),
    (4, 1.6),
    (2, 3.2),
    (2, 2.9),
    (2, 2.4),
    (2, 2.0),
    (2, 1.8),
    (2, 1.6),
];

pub fn default_fleet() -> Vec<PmSpec> {
    DEFAULT_FLEET
        .iter()
        .enumerate()
        .map(|(position, &(cores, ghz))| PmSpec::new(position + 1, cores, ghz))
        .collect()
}

/// EC2 c3.large: 2 vCPUs at 2.7 GHz, $0.105 per hour.
pub fn default_catalog() -> Vec<VmType> {
    vec![VmType {
        type_id: "c3.large".into(),
        core_count: 2,
        core_capacity: 2.7,
        price: 0.105,
        billing_period: DEFAULT_BILLING_PERIOD,
    }]
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    #[serde(default = "default_fleet")]
    pub fleet: Vec<PmSpec>,
    #[serde(default = "default_catalog")]
    pub catalog: Vec<VmType>,
    #[serde(default)]
    pub alpha: Option<u32>,
    #[serde(default = "one")]
    pub scale_factor: u32,
    #[serde(default)]
    pub vm_cap: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub task_mapping: TaskMapping,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            fleet: default_fleet(),
            catalog: default_catalog(),
            alpha: None,
            scale_factor: 1,
            vm_cap: None,
            epsilon: None,
            task_mapping: TaskMapping::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scale_factor must be at least 1")]
    ZeroScale,
}

impl HybridConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        if config.scale_factor == 0 {
            return Err(ConfigError::ZeroScale);
        }
        Ok(config)
    }

    pub fn fleet_config(&self) -> FleetConfig {
        FleetConfig {
            pms: self.fleet.clone(),
            scale_factor: self.scale_factor,
        }
    }

    /// The fleet replicated by `scale_factor`.
    pub fn scaled_pms(&self) -> Vec<PmSpec> {
        scale_fleet(&self.fleet_config())
    }

    /// Configured epsilon, validated against the catalog, or half of the
    /// admissible bound.
    pub fn objective_params(&self, pm_count: usize) -> Result<ObjectiveParams, MetricsError> {
        let pm_count = pm_count.max(1);
        let params = match self.epsilon {
            Some(epsilon) => ObjectiveParams::new(epsilon, pm_count),
            None => ObjectiveParams::new(default_epsilon(&self.catalog, pm_count)?, pm_count),
        };
        check_epsilon(&self.catalog, &params)?;
        Ok(params)
    }
}
