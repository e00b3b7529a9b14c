//! Run configuration, read from a TOML file.
//!
//! ```toml
//! schema_version = 1
//! seeds = [1, 2, 3]
//!
//! [protocol]      # base_ways, base_shots, incremental_sessions, ...
//! [device]        # g_reset, g_sat, n_span, increment_shape, sat_rate, sigma_prog, sigma_read
//! [array]         # rows, cols, read_noise = "per-mvm" | "frozen"
//! [adc]           # bits, full_scale (omit for worst-case scaling)
//! [workload]      # flip_prob, query_noise, embeddings = "path.csv"
//! [energy]        # v_source, i_peak, t_flat, t_trail, t_query, e_query, ...
//! [curve]         # n_devices, n_pulses
//! [output]        # query_log
//! ```
//!
//! Every section and key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::crossbar::{AdcConfig, ReadNoiseMode};
use crate::device::DeviceModelParams;
use crate::energy::EnergyTimeParams;
use crate::error::{Error, Result};
use crate::protocol::{ProtocolSpec, SimSetup};
use crate::workload::{load_embeddings, EmbeddingDataset, SessionSource, SyntheticWorkload, SyntheticWorkloadParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub device: DeviceModelParams,
    #[serde(default)]
    pub array: ArraySection,
    #[serde(default)]
    pub adc: AdcSection,
    #[serde(default)]
    pub workload: WorkloadSection,
    #[serde(default)]
    pub energy: EnergyTimeParams,
    #[serde(default)]
    pub curve: CurveSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub rows: usize,
    pub cols: usize,
    pub read_noise: ReadNoiseMode,
}

impl Default for ArraySection {
    fn default() -> Self {
        ArraySection { rows: 256, cols: 256, read_noise: ReadNoiseMode::PerMvm }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdcSection {
    pub bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_scale: Option<f64>,
}

impl Default for AdcSection {
    fn default() -> Self {
        AdcSection { bits: 8, full_scale: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkloadSection {
    pub flip_prob: f64,
    pub query_noise: f64,
    /// Replays controller outputs from this file instead of generating them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
}

impl Default for WorkloadSection {
    fn default() -> Self {
        let p = SyntheticWorkloadParams::default();
        WorkloadSection { flip_prob: p.flip_prob, query_noise: p.query_noise, embeddings: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSection {
    pub n_devices: usize,
    pub n_pulses: u32,
}

impl Default for CurveSection {
    fn default() -> Self {
        CurveSection { n_devices: 65_536, n_pulses: 20 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Also write a per-query prediction log for every seed.
    pub query_log: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seeds: default_seeds(),
            out_dir: None,
            protocol: ProtocolSpec::default(),
            device: DeviceModelParams::default(),
            array: ArraySection::default(),
            adc: AdcSection::default(),
            workload: WorkloadSection::default(),
            energy: EnergyTimeParams::default(),
            curve: CurveSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates; relative embedding paths resolve against
    /// `base_dir`.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string().trim_end().to_string()))?;
        if let (Some(base), Some(path)) = (base_dir, cfg.workload.embeddings.as_mut()) {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent()).map_err(|e| match e {
            Error::ConfigInvalid(msg) => Error::ConfigInvalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must list at least one seed"));
        }
        if self.array.rows == 0 || self.array.cols == 0 {
            return Err(Error::config("array: rows and cols must be >= 1"));
        }
        self.device.validate().map_err(|e| prefix("[device]", e))?;
        self.protocol.validate(Some(self.array.cols)).map_err(|e| prefix("[protocol]", e))?;
        self.adc_config().validate().map_err(|e| prefix("[adc]", e))?;
        self.synthetic_params(0).validate().map_err(|e| prefix("[workload]", e))?;
        self.energy.validate().map_err(|e| prefix("[energy]", e))?;
        if self.curve.n_devices == 0 {
            return Err(Error::config("[curve] n_devices must be >= 1"));
        }
        Ok(())
    }

    pub fn adc_config(&self) -> AdcConfig {
        let worst = AdcConfig::worst_case(self.array.rows, self.device.g_sat);
        AdcConfig { bits: self.adc.bits, full_scale: self.adc.full_scale.unwrap_or(worst.full_scale) }
    }

    pub fn sim_setup(&self) -> SimSetup {
        SimSetup {
            device: self.device,
            cols: self.array.cols,
            read_noise: self.array.read_noise,
            adc: Some(self.adc_config()),
            log_queries: self.output.query_log,
        }
    }

    pub fn synthetic_params(&self, seed: u64) -> SyntheticWorkloadParams {
        SyntheticWorkloadParams {
            d: self.array.rows,
            flip_prob: self.workload.flip_prob,
            query_noise: self.workload.query_noise,
            seed,
        }
    }

    /// Loads the embedding file, if configured, and checks it against the
    /// array and protocol.
    pub fn load_dataset(&self) -> Result<Option<EmbeddingDataset>> {
        let Some(path) = &self.workload.embeddings else {
            return Ok(None);
        };
        let ds = load_embeddings(path).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
            Error::RangeViolation { line, msg } => Error::RangeViolation { line, msg: format!("{}: {msg}", path.display()) },
            other => other,
        })?;
        if ds.dim() != self.array.rows {
            return Err(Error::DimensionMismatch { expected: self.array.rows, got: ds.dim() });
        }
        ds.validate_against(&self.protocol)?;
        Ok(Some(ds))
    }

    /// The session source for one seed: the replayed dataset when given,
    /// otherwise a synthetic workload seeded by `seed`.
    pub fn workload(&self, dataset: Option<&EmbeddingDataset>, seed: u64) -> Result<Box<dyn SessionSource + Send>> {
        Ok(match dataset {
            Some(ds) => Box::new(ds.clone()),
            None => Box::new(SyntheticWorkload::new(self.synthetic_params(seed), &self.protocol)?),
        })
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::ConfigInvalid(msg) => Error::ConfigInvalid(format!("{section} {msg}")),
        other => other,
    }
}
