//! Crossbar of differential PCM unit cells.
//!
//! Each unit cell holds a positive and a negative device; its weight is
//! `g(positive) - g(negative)`. Columns are programmed with bipolar vectors
//! by pulsing one device of each pair, and similarity search is a
//! 4-quadrant MVM between a signed 8-bit query and the analog columns,
//! digitized by an ADC.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceModelParams, PcmDeviceState};
use crate::error::{Error, Result};
use crate::vector::{BipolarVector, QueryVector};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitCell {
    pub positive: PcmDeviceState,
    pub negative: PcmDeviceState,
}

impl UnitCell {
    pub fn weight(&self) -> f64 {
        self.positive.conductance - self.negative.conductance
    }

    /// Net pulse count `n_plus - n_minus`.
    pub fn net_pulses(&self) -> i64 {
        self.positive.pulse_count as i64 - self.negative.pulse_count as i64
    }
}

/// Whether read noise is redrawn on every MVM or fixed per device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadNoiseMode {
    #[default]
    PerMvm,
    Frozen,
}

/// Output ADC. Analog column sums are scaled so that `full_scale` maps to
/// the largest code, rounded half away from zero, then clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    pub bits: u32,
    pub full_scale: f64,
}

impl AdcConfig {
    /// Full scale equal to the largest attainable column magnitude:
    /// every row at `g_sat` driven by a full-scale input.
    pub fn worst_case(rows: usize, g_sat: f64) -> Self {
        AdcConfig { bits: 8, full_scale: rows as f64 * g_sat * QueryVector::MAX as f64 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=32).contains(&self.bits) {
            return Err(Error::config(format!("adc: bits must be in 1..=32 (got {})", self.bits)));
        }
        if !(self.full_scale.is_finite() && self.full_scale > 0.0) {
            return Err(Error::config("adc: full_scale must be positive and finite"));
        }
        Ok(())
    }

    pub fn max_code(&self) -> i64 {
        (1i64 << (self.bits - 1)) - 1
    }

    /// Analog value of one ADC code.
    pub fn step(&self) -> f64 {
        self.full_scale / self.max_code() as f64
    }

    pub fn quantize(&self, analog: f64) -> i32 {
        let max = self.max_code();
        if max == 0 {
            return 0;
        }
        let code = (analog / self.step()).round();
        code.clamp(-(max as f64), max as f64) as i32
    }

    /// True when `analog` lies beyond the representable range.
    pub fn clips(&self, analog: f64) -> bool {
        analog.abs() / self.step() > self.max_code() as f64 + 0.5
    }
}

/// Number of read phases a 4-quadrant MVM needs for `query`: one for the
/// positive inputs and one for the negative inputs, when present.
pub fn read_phases(query: &QueryVector) -> u32 {
    let pos = query.as_slice().iter().any(|&q| q > 0);
    let neg = query.as_slice().iter().any(|&q| q < 0);
    pos as u32 + neg as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    // column-major
    cells: Vec<UnitCell>,
    params: DeviceModelParams,
    read_noise: ReadNoiseMode,
    frozen_offsets: Option<Vec<[f64; 2]>>,
}

impl CrossbarArray {
    /// A fully reset array.
    pub fn new(rows: usize, cols: usize, params: DeviceModelParams) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::config("array dimensions must be >= 1"));
        }
        params.validate()?;
        let reset = PcmDeviceState::reset_state(&params);
        Ok(CrossbarArray {
            rows,
            cols,
            cells: vec![UnitCell { positive: reset, negative: reset }; rows * cols],
            params,
            read_noise: ReadNoiseMode::PerMvm,
            frozen_offsets: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn device_params(&self) -> &DeviceModelParams {
        &self.params
    }

    pub fn read_noise_mode(&self) -> ReadNoiseMode {
        self.read_noise
    }

    /// Switches to frozen read noise, drawing one fixed offset per device.
    pub fn freeze_read_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let sigma = self.params.sigma_read;
        let offsets = (0..self.cells.len())
            .map(|_| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                [sigma * a, sigma * b]
            })
            .collect();
        self.read_noise = ReadNoiseMode::Frozen;
        self.frozen_offsets = Some(offsets);
    }

    pub fn cell(&self, row: usize, col: usize) -> &UnitCell {
        &self.cells[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> Result<&[UnitCell]> {
        self.check_col(col)?;
        Ok(&self.cells[col * self.rows..(col + 1) * self.rows])
    }

    fn check_col(&self, col: usize) -> Result<()> {
        if col >= self.cols {
            return Err(Error::ColumnOutOfRange { col, cols: self.cols });
        }
        Ok(())
    }

    /// One SET pulse per row of `col`: on the positive device where
    /// `vec[r] = +1`, on the negative device otherwise.
    pub fn program_column_bipolar<R: Rng + ?Sized>(
        &mut self,
        col: usize,
        vec: &BipolarVector,
        rng: &mut R,
    ) -> Result<()> {
        vec.check_len(self.rows)?;
        self.check_col(col)?;
        let params = &self.params;
        let column = &mut self.cells[col * self.rows..(col + 1) * self.rows];
        for (cell, &e) in column.iter_mut().zip(vec.as_slice()) {
            let device = if e > 0 { &mut cell.positive } else { &mut cell.negative };
            device.apply_set_pulse(params, rng);
        }
        Ok(())
    }

    pub fn reset_column(&mut self, col: usize) -> Result<()> {
        self.check_col(col)?;
        let params = &self.params;
        for cell in &mut self.cells[col * self.rows..(col + 1) * self.rows] {
            cell.positive.reset(params);
            cell.negative.reset(params);
        }
        Ok(())
    }

    pub fn reset_array(&mut self) {
        for col in 0..self.cols {
            self.reset_column(col).expect("in range");
        }
    }

    pub fn column_saturated(&self, col: usize) -> Result<bool> {
        let p = &self.params;
        Ok(self
            .column(col)?
            .iter()
            .any(|c| c.positive.is_saturated(p) || c.negative.is_saturated(p)))
    }

    /// Analog column sums `sum_r q[r] * (read(g+) - read(g-))` before the ADC.
    pub fn analog_mvm<R: Rng + ?Sized>(
        &self,
        query: &QueryVector,
        active_cols: &[usize],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        query.check_len(self.rows)?;
        if active_cols.is_empty() {
            return Err(Error::EmptyActiveSet);
        }
        for &c in active_cols {
            self.check_col(c)?;
        }
        let sigma = self.params.sigma_read;
        let q = query.as_slice();
        let out = active_cols
            .iter()
            .map(|&col| {
                let base = col * self.rows;
                let column = &self.cells[base..base + self.rows];
                match (sigma > 0.0, &self.frozen_offsets) {
                    (false, _) => column
                        .iter()
                        .zip(q)
                        .map(|(cell, &x)| x as f64 * cell.weight())
                        .sum(),
                    (true, Some(offsets)) => column
                        .iter()
                        .zip(&offsets[base..base + self.rows])
                        .zip(q)
                        .map(|((cell, off), &x)| {
                            let gp = (cell.positive.conductance + off[0]).max(0.0);
                            let gn = (cell.negative.conductance + off[1]).max(0.0);
                            x as f64 * (gp - gn)
                        })
                        .sum(),
                    (true, None) => {
                        let mut acc = 0.0;
                        for (cell, &x) in column.iter().zip(q) {
                            if x == 0 {
                                continue;
                            }
                            let np: f64 = rng.sample(StandardNormal);
                            let nn: f64 = rng.sample(StandardNormal);
                            let gp = (cell.positive.conductance + sigma * np).max(0.0);
                            let gn = (cell.negative.conductance + sigma * nn).max(0.0);
                            acc += x as f64 * (gp - gn);
                        }
                        acc
                    }
                }
            })
            .collect();
        Ok(out)
    }

    /// Digitized scores, one per entry of `active_cols`, in order.
    pub fn mvm<R: Rng + ?Sized>(
        &self,
        query: &QueryVector,
        adc: &AdcConfig,
        active_cols: &[usize],
        rng: &mut R,
    ) -> Result<Vec<i32>> {
        Ok(self
            .analog_mvm(query, active_cols, rng)?
            .into_iter()
            .map(|s| adc.quantize(s))
            .collect())
    }

    pub fn write_snapshot_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SNAPSHOT_CSV_HEADER}")?;
        for row in 0..self.rows {
            for col in 0..self.cols {
                let c = self.cell(row, col);
                writeln!(
                    w,
                    "{row},{col},{},{},{},{}",
                    c.positive.conductance, c.negative.conductance, c.positive.pulse_count, c.negative.pulse_count
                )?;
            }
        }
        Ok(())
    }

    /// Rebuilds an array from a snapshot; dimensions are inferred and every
    /// cell must appear exactly once.
    pub fn read_snapshot_csv<R: BufRead>(r: R, params: DeviceModelParams) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let lineno = i as u64 + 1;
            let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
            if i == 0 {
                if line.trim() != SNAPSHOT_CSV_HEADER {
                    return Err(Error::Parse { line: 1, msg: format!("expected header `{SNAPSHOT_CSV_HEADER}`") });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = |what: &str| Error::Parse { line: lineno, msg: format!("bad {what}") };
            if f.len() != 6 {
                return Err(Error::Parse { line: lineno, msg: format!("expected 6 fields, got {}", f.len()) });
            }
            let row: usize = f[0].parse().map_err(|_| bad("row"))?;
            let col: usize = f[1].parse().map_err(|_| bad("col"))?;
            let gp: f64 = f[2].parse().map_err(|_| bad("g_plus"))?;
            let gn: f64 = f[3].parse().map_err(|_| bad("g_minus"))?;
            let np: u32 = f[4].parse().map_err(|_| bad("n_plus"))?;
            let nn: u32 = f[5].parse().map_err(|_| bad("n_minus"))?;
            for g in [gp, gn] {
                if !(0.0..=params.g_sat).contains(&g) {
                    return Err(Error::RangeViolation { line: lineno, msg: format!("conductance {g} outside [0, g_sat]") });
                }
            }
            entries.push((row, col, UnitCell {
                positive: PcmDeviceState { conductance: gp, pulse_count: np },
                negative: PcmDeviceState { conductance: gn, pulse_count: nn },
            }));
        }
        let rows = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let cols = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
        let mut array = CrossbarArray::new(rows, cols, params)?;
        if entries.len() != rows * cols {
            return Err(Error::config(format!(
                "snapshot has {} cells, expected {rows}x{cols}",
                entries.len()
            )));
        }
        let mut seen = vec![false; rows * cols];
        for (row, col, cell) in entries {
            let idx = col * rows + row;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::config(format!("snapshot lists cell ({row},{col}) twice")));
            }
            array.cells[idx] = cell;
        }
        Ok(array)
    }
}

pub const SNAPSHOT_CSV_HEADER: &str = "row,col,g_plus,g_minus,n_plus,n_minus";
