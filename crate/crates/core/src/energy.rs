//! Analytic energy and latency of explicit-memory operations.
//!
//! A SET pulse is a flat segment at peak current followed by a linear
//! trailing ramp, so its energy is `V * I * (t_flat + t_trail / 2)`.
//! Programming a class vector pulses its `d` elements one after another;
//! distinct columns may be programmed in parallel. Similarity search is
//! costed per query as a lump figure covering DAC, array read and ADC.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::SessionEvents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgrammingMode {
    Serial,
    ColumnParallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyTimeParams {
    pub v_source: f64,
    pub i_peak: f64,
    pub t_flat: f64,
    pub t_trail: f64,
    /// Latency of one similarity search.
    pub t_query: f64,
    /// Energy of one similarity search.
    pub e_query: f64,
    pub programming_mode: ProgrammingMode,
    /// Energy of programming a vector element from scratch relative to one
    /// in-situ accumulation pulse.
    pub e_pulse_from_scratch_ratio: f64,
    /// Published core search energy per 256-element class vector; reported
    /// as given.
    pub e_search_per_class_vector: f64,
}

impl Default for EnergyTimeParams {
    fn default() -> Self {
        EnergyTimeParams {
            v_source: 2.34,
            i_peak: 150e-6,
            t_flat: 5e-9,
            t_trail: 40e-9,
            t_query: 520e-9,
            e_query: 7.74e-9,
            programming_mode: ProgrammingMode::ColumnParallel,
            e_pulse_from_scratch_ratio: 4.7,
            e_search_per_class_vector: 19.1e-12,
        }
    }
}

impl EnergyTimeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_source", self.v_source),
            ("i_peak", self.i_peak),
            ("t_flat", self.t_flat),
            ("t_query", self.t_query),
            ("e_query", self.e_query),
            ("e_search_per_class_vector", self.e_search_per_class_vector),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config(format!("energy: {name} must be positive (got {v})")));
        }
        // a zero trailing edge is a legitimate square pulse
        if !(self.t_trail.is_finite() && self.t_trail >= 0.0) {
            return Err(Error::config("energy: t_trail must be >= 0"));
        }
        if !(self.e_pulse_from_scratch_ratio.is_finite() && self.e_pulse_from_scratch_ratio >= 1.0) {
            return Err(Error::config("energy: e_pulse_from_scratch_ratio must be >= 1"));
        }
        Ok(())
    }
}

/// Time and energy of an operation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cost {
    pub seconds: f64,
    pub joules: f64,
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost { seconds: self.seconds + o.seconds, joules: self.joules + o.joules }
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::default(), |a, b| a + b)
    }
}

pub fn pulse_energy(p: &EnergyTimeParams) -> f64 {
    p.v_source * p.i_peak * (p.t_flat + p.t_trail / 2.0)
}

pub fn pulse_duration(p: &EnergyTimeParams) -> f64 {
    p.t_flat + p.t_trail
}

/// One class-vector update: `d` pulses applied serially within the column.
pub fn class_update_cost(d: usize, p: &EnergyTimeParams) -> Cost {
    Cost { seconds: d as f64 * pulse_duration(p), joules: d as f64 * pulse_energy(p) }
}

/// `n_updates` class-vector updates spread over `n_parallel_columns`
/// columns. Every pulse costs energy; in column-parallel mode updates on
/// distinct columns overlap in time.
pub fn sessions_update_cost(n_updates: usize, n_parallel_columns: usize, d: usize, p: &EnergyTimeParams) -> Result<Cost> {
    if n_updates == 0 || n_parallel_columns == 0 {
        return Err(Error::config("update cost needs n_updates >= 1 and n_parallel_columns >= 1"));
    }
    let one = class_update_cost(d, p);
    let rounds = match p.programming_mode {
        ProgrammingMode::Serial => n_updates,
        ProgrammingMode::ColumnParallel => n_updates.div_ceil(n_parallel_columns),
    };
    Ok(Cost { seconds: rounds as f64 * one.seconds, joules: n_updates as f64 * one.joules })
}

pub fn evaluation_cost(n_queries: usize, p: &EnergyTimeParams) -> Result<Cost> {
    if n_queries == 0 {
        return Err(Error::config("evaluation cost needs n_queries >= 1"));
    }
    Ok(Cost { seconds: n_queries as f64 * p.t_query, joules: n_queries as f64 * p.e_query })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgrammingComparison {
    pub in_situ_per_element: f64,
    pub from_scratch_per_element: f64,
    pub ratio: f64,
    pub in_situ_column: f64,
    pub from_scratch_column: f64,
}

pub fn in_situ_vs_scratch(p: &EnergyTimeParams, d: usize) -> ProgrammingComparison {
    let e = pulse_energy(p);
    let scratch = e * p.e_pulse_from_scratch_ratio;
    ProgrammingComparison {
        in_situ_per_element: e,
        from_scratch_per_element: scratch,
        ratio: p.e_pulse_from_scratch_ratio,
        in_situ_column: d as f64 * e,
        from_scratch_column: d as f64 * scratch,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionCost {
    pub session: u32,
    pub updates: usize,
    pub parallel_columns: usize,
    pub programming: Cost,
    pub queries: usize,
    pub read_phases: u64,
    pub evaluation: Cost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub dim: usize,
    pub params: EnergyTimeParams,
    pub pulse_energy: f64,
    pub class_update: Cost,
    pub comparison: ProgrammingComparison,
    pub sessions: Vec<SessionCost>,
    pub programming_total: Cost,
    pub evaluation_total: Cost,
    pub total: Cost,
}

impl EnergyReport {
    /// Costs every session from its operation counts.
    pub fn from_events(events: &[SessionEvents], d: usize, params: &EnergyTimeParams) -> Result<Self> {
        params.validate()?;
        let sessions = events
            .iter()
            .map(|e| {
                let programming = if e.updates > 0 {
                    sessions_update_cost(e.updates, e.columns_updated.max(1), d, params)?
                } else {
                    Cost::default()
                };
                let evaluation = if e.queries > 0 { evaluation_cost(e.queries, params)? } else { Cost::default() };
                Ok(SessionCost {
                    session: e.session,
                    updates: e.updates,
                    parallel_columns: e.columns_updated,
                    programming,
                    queries: e.queries,
                    read_phases: e.read_phases,
                    evaluation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let programming_total: Cost = sessions.iter().map(|s| s.programming).sum();
        let evaluation_total: Cost = sessions.iter().map(|s| s.evaluation).sum();
        Ok(EnergyReport {
            dim: d,
            params: params.clone(),
            pulse_energy: pulse_energy(params),
            class_update: class_update_cost(d, params),
            comparison: in_situ_vs_scratch(params, d),
            sessions,
            programming_total,
            evaluation_total,
            total: programming_total + evaluation_total,
        })
    }

    /// `key = value` text; values in SI base units with a rounded
    /// human-readable form after `#`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mode = match self.params.programming_mode {
            ProgrammingMode::Serial => "serial",
            ProgrammingMode::ColumnParallel => "column-parallel",
        };
        let kv = |s: &mut String, key: &str, v: f64, unit: &str| {
            writeln!(s, "{key} = {v:e}  # {}", si(v, unit)).unwrap();
        };
        writeln!(s, "[device]").unwrap();
        writeln!(s, "dim = {}", self.dim).unwrap();
        writeln!(s, "programming_mode = \"{mode}\"").unwrap();
        kv(&mut s, "pulse_energy_j", self.pulse_energy, "J");
        kv(&mut s, "pulse_duration_s", pulse_duration(&self.params), "s");
        kv(&mut s, "class_update_time_s", self.class_update.seconds, "s");
        kv(&mut s, "class_update_energy_j", self.class_update.joules, "J");
        kv(&mut s, "query_time_s", self.params.t_query, "s");
        kv(&mut s, "query_energy_j", self.params.e_query, "J");
        kv(&mut s, "search_energy_per_class_vector_j", self.params.e_search_per_class_vector, "J");
        for c in &self.sessions {
            writeln!(s, "\n[session.{}]", c.session).unwrap();
            writeln!(s, "updates = {}", c.updates).unwrap();
            writeln!(s, "parallel_columns = {}", c.parallel_columns).unwrap();
            kv(&mut s, "programming_time_s", c.programming.seconds, "s");
            kv(&mut s, "programming_energy_j", c.programming.joules, "J");
            writeln!(s, "queries = {}", c.queries).unwrap();
            writeln!(s, "read_phases = {}", c.read_phases).unwrap();
            kv(&mut s, "evaluation_time_s", c.evaluation.seconds, "s");
            kv(&mut s, "evaluation_energy_j", c.evaluation.joules, "J");
        }
        writeln!(s, "\n[totals]").unwrap();
        kv(&mut s, "programming_time_s", self.programming_total.seconds, "s");
        kv(&mut s, "programming_energy_j", self.programming_total.joules, "J");
        kv(&mut s, "evaluation_time_s", self.evaluation_total.seconds, "s");
        kv(&mut s, "evaluation_energy_j", self.evaluation_total.joules, "J");
        kv(&mut s, "time_s", self.total.seconds, "s");
        kv(&mut s, "energy_j", self.total.joules, "J");
        writeln!(s, "\n[in_situ_vs_scratch]").unwrap();
        kv(&mut s, "in_situ_per_element_j", self.comparison.in_situ_per_element, "J");
        kv(&mut s, "from_scratch_per_element_j", self.comparison.from_scratch_per_element, "J");
        kv(&mut s, "in_situ_column_j", self.comparison.in_situ_column, "J");
        kv(&mut s, "from_scratch_column_j", self.comparison.from_scratch_column, "J");
        writeln!(s, "ratio = {}  # {}x", self.comparison.ratio, sig3(self.comparison.ratio)).unwrap();
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phase,session,count,seconds,joules")?;
        for c in &self.sessions {
            writeln!(w, "programming,{},{},{:e},{:e}", c.session, c.updates, c.programming.seconds, c.programming.joules)?;
            writeln!(w, "evaluation,{},{},{:e},{:e}", c.session, c.queries, c.evaluation.seconds, c.evaluation.joules)?;
        }
        let updates: usize = self.sessions.iter().map(|c| c.updates).sum();
        let queries: usize = self.sessions.iter().map(|c| c.queries).sum();
        writeln!(w, "programming,total,{updates},{:e},{:e}", self.programming_total.seconds, self.programming_total.joules)?;
        writeln!(w, "evaluation,total,{queries},{:e},{:e}", self.evaluation_total.seconds, self.evaluation_total.joules)?;
        writeln!(w, "all,total,{},{:e},{:e}", updates + queries, self.total.seconds, self.total.joules)
    }
}

fn sig3(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    // decimal inputs such as 8.775 are stored a few ulps low; nudge so the
    // printed rounding matches the decimal value
    let v = v * (1.0 + 1e-12);
    let digits = (2 - v.abs().log10().floor() as i32).max(0) as usize;
    format!("{v:.digits$}")
}

/// Three significant digits with an SI prefix, e.g. `8.78 pJ`.
pub fn si(v: f64, unit: &str) -> String {
    const PREFIXES: [(f64, &str); 7] = [(1.0, ""), (1e-3, "m"), (1e-6, "µ"), (1e-9, "n"), (1e-12, "p"), (1e-15, "f"), (1e-18, "a")];
    if v == 0.0 {
        return format!("0 {unit}");
    }
    let (scale, prefix) = PREFIXES
        .iter()
        .copied()
        .find(|(s, _)| v.abs() >= *s * (1.0 - 1e-12))
        .unwrap_or(PREFIXES[PREFIXES.len() - 1]);
    format!("{} {prefix}{unit}", sig3(v / scale))
}
