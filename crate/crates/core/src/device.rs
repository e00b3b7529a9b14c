//! Stochastic model of a single PCM device.
//!
//! Conductance is normalized to `[0, g_sat]`. A RESET puts the device at
//! `g_reset`; each SET pulse adds a mean increment plus Gaussian programming
//! noise (progressive crystallization). Reads add Gaussian read noise.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean per-pulse conductance increment law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncrementShape {
    /// Constant step `(g_sat - g_reset) / n_span`.
    Linear,
    /// Step `sat_rate * (g_sat - g)`, flattening towards `g_sat`.
    Saturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceModelParams {
    pub g_reset: f64,
    pub g_sat: f64,
    /// Pulses needed to traverse the dynamic range.
    pub n_span: u32,
    pub increment_shape: IncrementShape,
    pub sat_rate: f64,
    pub sigma_prog: f64,
    pub sigma_read: f64,
}

impl Default for DeviceModelParams {
    fn default() -> Self {
        DeviceModelParams {
            g_reset: 0.0,
            g_sat: 1.0,
            n_span: 8,
            increment_shape: IncrementShape::Linear,
            sat_rate: 0.3,
            sigma_prog: 0.0,
            sigma_read: 0.0,
        }
    }
}

impl DeviceModelParams {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.g_reset, self.g_sat, self.sat_rate, self.sigma_prog, self.sigma_read]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("device parameters must be finite"));
        }
        if !(0.0 <= self.g_reset && self.g_reset < self.g_sat) {
            return Err(Error::config(format!(
                "device: need 0 <= g_reset < g_sat (got g_reset={}, g_sat={})",
                self.g_reset, self.g_sat
            )));
        }
        if self.n_span == 0 {
            return Err(Error::config("device: n_span must be >= 1"));
        }
        if self.sigma_prog < 0.0 || self.sigma_read < 0.0 {
            return Err(Error::config("device: noise standard deviations must be >= 0"));
        }
        if self.increment_shape == IncrementShape::Saturating && !(0.0 < self.sat_rate && self.sat_rate <= 1.0) {
            return Err(Error::config("device: sat_rate must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Mean increment of one SET pulse applied at conductance `g`.
    pub fn mean_increment(&self, g: f64) -> f64 {
        match self.increment_shape {
            IncrementShape::Linear => (self.g_sat - self.g_reset) / self.n_span as f64,
            IncrementShape::Saturating => self.sat_rate * (self.g_sat - g),
        }
    }

    /// True when both programming and read noise are disabled.
    pub fn is_noiseless(&self) -> bool {
        self.sigma_prog == 0.0 && self.sigma_read == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PcmDeviceState {
    pub conductance: f64,
    pub pulse_count: u32,
}

impl PcmDeviceState {
    pub fn reset_state(params: &DeviceModelParams) -> Self {
        PcmDeviceState { conductance: params.g_reset, pulse_count: 0 }
    }

    pub fn reset(&mut self, params: &DeviceModelParams) {
        *self = Self::reset_state(params);
    }

    pub fn apply_set_pulse<R: Rng + ?Sized>(&mut self, params: &DeviceModelParams, rng: &mut R) {
        let mut g = self.conductance + params.mean_increment(self.conductance);
        if params.sigma_prog > 0.0 {
            let eps: f64 = rng.sample(StandardNormal);
            g += params.sigma_prog * eps;
        }
        // summed linear steps can land a few ulps short of g_sat
        if params.g_sat - g <= 1e-12 * (params.g_sat - params.g_reset) {
            g = params.g_sat;
        }
        self.conductance = g.clamp(0.0, params.g_sat);
        self.pulse_count += 1;
    }

    /// Noisy read, floored at zero.
    pub fn read<R: Rng + ?Sized>(&self, params: &DeviceModelParams, rng: &mut R) -> f64 {
        if params.sigma_read > 0.0 {
            let eta: f64 = rng.sample(StandardNormal);
            (self.conductance + params.sigma_read * eta).max(0.0)
        } else {
            self.conductance
        }
    }

    pub fn is_saturated(&self, params: &DeviceModelParams) -> bool {
        self.conductance >= params.g_sat
    }
}

/// One row of a conductance-evolution table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub pulse: u32,
    pub mean: f64,
    pub std: f64,
}

/// Empirical mean and standard deviation of conductance across `n_devices`
/// devices after `0..=n_pulses` SET pulses from RESET.
pub fn conductance_curve<R: Rng + ?Sized>(
    params: &DeviceModelParams,
    n_devices: usize,
    n_pulses: u32,
    rng: &mut R,
) -> Result<Vec<CurveRow>> {
    if n_devices == 0 {
        return Err(Error::config("conductance curve needs at least one device"));
    }
    params.validate()?;
    let mut devices = vec![PcmDeviceState::reset_state(params); n_devices];
    let mut rows = Vec::with_capacity(n_pulses as usize + 1);
    rows.push(summarize(0, &devices));
    for k in 1..=n_pulses {
        for d in devices.iter_mut() {
            d.apply_set_pulse(params, rng);
        }
        rows.push(summarize(k, &devices));
    }
    Ok(rows)
}

fn summarize(pulse: u32, devices: &[PcmDeviceState]) -> CurveRow {
    let first = devices[0].conductance;
    if devices.iter().all(|d| d.conductance == first) {
        return CurveRow { pulse, mean: first, std: 0.0 };
    }
    let n = devices.len() as f64;
    let mean = devices.iter().map(|d| d.conductance).sum::<f64>() / n;
    let var = devices.iter().map(|d| (d.conductance - mean).powi(2)).sum::<f64>() / n;
    CurveRow { pulse, mean, std: var.sqrt() }
}

pub const CURVE_CSV_HEADER: &str = "pulse,mean,std";

pub fn write_curve_csv<W: Write>(mut w: W, rows: &[CurveRow]) -> std::io::Result<()> {
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{:.10},{:.10}", r.pulse, r.mean, r.std)?;
    }
    Ok(())
}

pub fn read_curve_csv<R: BufRead>(r: R) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        if i == 0 {
            if line.trim() != CURVE_CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("expected header `{CURVE_CSV_HEADER}`") });
            }
            continue;
        }
        let bad = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
        let mut it = line.split(',');
        let pulse = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad pulse"))?;
        let mean = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad mean"))?;
        let std = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad std"))?;
        rows.push(CurveRow { pulse, mean, std });
    }
    Ok(rows)
}
