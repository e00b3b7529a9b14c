//! Device-level simulation of a phase-change-memory (PCM) crossbar used as
//! the explicit memory of a few-shot class-incremental learner.
//!
//! Bipolar support vectors are superposed in place on crossbar columns by
//! progressive crystallization, queries are classified by an analog
//! matrix-vector multiply with DAC/ADC quantization, and every result is
//! checked against an exact integer oracle. An analytic cost model gives the
//! energy and latency of programming and search.

pub mod cli;
pub mod config;
pub mod crossbar;
pub mod device;
pub mod energy;
pub mod error;
pub mod memory;
pub mod oracle;
pub mod plot;
pub mod protocol;
pub mod rng;
pub mod vector;
pub mod workload;

pub use crossbar::{AdcConfig, CrossbarArray, ReadNoiseMode, UnitCell};
pub use device::{DeviceModelParams, IncrementShape, PcmDeviceState};
pub use energy::{EnergyReport, EnergyTimeParams, ProgrammingMode};
pub use error::{Error, Result};
pub use memory::{ExplicitMemory, LearnOutcome, SaturationWarning};
pub use oracle::OracleMemory;
pub use protocol::{run_protocol, ProtocolSpec, SessionResult, SimSetup};
pub use vector::{BipolarVector, ClassId, QueryVector};
pub use workload::{EmbeddingDataset, SessionSource, SyntheticWorkload, SyntheticWorkloadParams};
