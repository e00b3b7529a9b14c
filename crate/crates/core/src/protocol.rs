//! Session protocol: a base session followed by few-shot incremental
//! sessions, run in lockstep over the analog memory and the exact oracle.
//!
//! Both memories receive the same support and query instances, so any
//! accuracy gap between them comes from device noise and ADC effects only.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::crossbar::{read_phases, AdcConfig, CrossbarArray, ReadNoiseMode};
use crate::device::DeviceModelParams;
use crate::error::{Error, Result};
use crate::memory::ExplicitMemory;
use crate::oracle::OracleMemory;
use crate::rng::{self, tag};
use crate::vector::ClassId;
use crate::workload::SessionSource;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSpec {
    pub base_ways: u32,
    /// Supports written per base class in the first session.
    pub base_shots: u32,
    pub incremental_sessions: u32,
    pub ways_per_session: u32,
    pub shots_per_class: u32,
    pub queries_per_class: u32,
}

impl Default for ProtocolSpec {
    /// 60 base classes, then eight 5-way 5-shot sessions; 100 queries per class.
    fn default() -> Self {
        ProtocolSpec {
            base_ways: 60,
            base_shots: 5,
            incremental_sessions: 8,
            ways_per_session: 5,
            shots_per_class: 5,
            queries_per_class: 100,
        }
    }
}

impl ProtocolSpec {
    pub fn num_sessions(&self) -> usize {
        1 + self.incremental_sessions as usize
    }

    pub fn total_classes(&self) -> usize {
        self.base_ways as usize + (self.incremental_sessions * self.ways_per_session) as usize
    }

    /// Classes seen after the zero-based session `index`.
    pub fn classes_seen(&self, index: usize) -> usize {
        self.base_ways as usize + index * self.ways_per_session as usize
    }

    /// Class ids introduced in session `index`, with supports per class.
    pub fn new_classes(&self, index: usize) -> (Range<usize>, u32) {
        if index == 0 {
            (0..self.base_ways as usize, self.base_shots)
        } else {
            (self.classes_seen(index - 1)..self.classes_seen(index), self.shots_per_class)
        }
    }

    pub fn validate(&self, cols: Option<usize>) -> Result<()> {
        let counts = [
            ("base_ways", self.base_ways),
            ("base_shots", self.base_shots),
            ("incremental_sessions", self.incremental_sessions),
            ("ways_per_session", self.ways_per_session),
            ("shots_per_class", self.shots_per_class),
            ("queries_per_class", self.queries_per_class),
        ];
        // a protocol without incremental sessions is still a valid run
        if let Some((name, _)) = counts.iter().find(|(n, v)| *v == 0 && *n != "incremental_sessions") {
            return Err(Error::config(format!("protocol: {name} must be >= 1")));
        }
        if let Some(cols) = cols {
            if self.total_classes() > cols {
                return Err(Error::config(format!(
                    "protocol: {} classes exceed the {cols} array columns",
                    self.total_classes()
                )));
            }
        }
        Ok(())
    }
}

/// Accuracy of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    /// One-based.
    pub session: u32,
    pub classes_seen: usize,
    pub n_queries: usize,
    pub accuracy_imc: f64,
    pub accuracy_oracle: f64,
    pub degradation: f64,
}

/// Operation counts of one session, consumed by the cost model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionEvents {
    pub session: u32,
    /// Class-vector updates, one per support written.
    pub updates: usize,
    /// Distinct columns touched by those updates.
    pub columns_updated: usize,
    pub expansions: usize,
    pub set_pulses: u64,
    pub queries: usize,
    pub read_phases: u64,
    pub saturation_warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub session: u32,
    pub index: usize,
    pub true_class: ClassId,
    pub predicted_imc: ClassId,
    pub predicted_oracle: ClassId,
}

/// Array-level settings of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSetup {
    pub device: DeviceModelParams,
    pub cols: usize,
    pub read_noise: ReadNoiseMode,
    /// `None` selects the worst-case 8-bit ADC for the array.
    pub adc: Option<AdcConfig>,
    pub log_queries: bool,
}

impl Default for SimSetup {
    fn default() -> Self {
        SimSetup {
            device: DeviceModelParams::default(),
            cols: 256,
            read_noise: ReadNoiseMode::PerMvm,
            adc: None,
            log_queries: false,
        }
    }
}

/// Steps a protocol one session at a time.
pub struct ProtocolRunner<'a, S: SessionSource + ?Sized> {
    spec: ProtocolSpec,
    source: &'a mut S,
    em: ExplicitMemory,
    oracle: OracleMemory,
    adc: AdcConfig,
    seed: u64,
    next_session: usize,
    log_queries: bool,
    query_log: Vec<QueryRecord>,
}

impl<'a, S: SessionSource + ?Sized> ProtocolRunner<'a, S> {
    pub fn new(spec: &ProtocolSpec, source: &'a mut S, setup: &SimSetup, seed: u64) -> Result<Self> {
        spec.validate(Some(setup.cols))?;
        if source.num_sessions() != spec.num_sessions() {
            return Err(Error::config(format!(
                "workload provides {} sessions, protocol expects {}",
                source.num_sessions(),
                spec.num_sessions()
            )));
        }
        let rows = source.dim();
        let mut array = CrossbarArray::new(rows, setup.cols, setup.device)?;
        if setup.read_noise == ReadNoiseMode::Frozen {
            array.freeze_read_noise(&mut rng::stream(seed, &[tag::FROZEN_READ]));
        }
        let adc = setup.adc.unwrap_or_else(|| AdcConfig::worst_case(rows, setup.device.g_sat));
        adc.validate()?;
        Ok(ProtocolRunner {
            spec: spec.clone(),
            source,
            em: ExplicitMemory::new(array),
            oracle: OracleMemory::new(rows),
            adc,
            seed,
            next_session: 0,
            log_queries: setup.log_queries,
            query_log: Vec::new(),
        })
    }

    pub fn memory(&self) -> &ExplicitMemory {
        &self.em
    }

    pub fn oracle(&self) -> &OracleMemory {
        &self.oracle
    }

    pub fn sessions_done(&self) -> usize {
        self.next_session
    }

    /// Writes the next session's supports and, if `evaluate`, scores its
    /// queries. Returns `None` once every session has run.
    pub fn step(&mut self, evaluate: bool) -> Result<Option<(SessionResult, SessionEvents)>> {
        if self.next_session >= self.spec.num_sessions() {
            return Ok(None);
        }
        let index = self.next_session;
        let session = index as u32 + 1;
        let data = self.source.session(index)?;

        let mut events = SessionEvents { session, ..Default::default() };
        let mut touched = BTreeSet::new();
        let mut prog_rng = rng::stream(self.seed, &[tag::PROGRAMMING, index as u64]);
        for (class, support) in &data.supports {
            let out = self.em.learn_support(*class, support, &mut prog_rng)?;
            self.oracle.learn(*class, support)?;
            touched.insert(out.column);
            events.updates += 1;
            events.expansions += out.expanded as usize;
            events.saturation_warnings += out.saturation.is_some() as usize;
        }
        events.columns_updated = touched.len();
        events.set_pulses = events.updates as u64 * self.em.dim() as u64;

        let (mut hits_imc, mut hits_oracle) = (0usize, 0usize);
        if evaluate {
            for (i, (truth, query)) in data.queries.iter().enumerate() {
                let mut read_rng = rng::stream(self.seed, &[tag::READ, index as u64, i as u64]);
                let imc = self.em.classify(query, &self.adc, &mut read_rng)?;
                let ora = self.oracle.classify(query)?;
                hits_imc += (imc == *truth) as usize;
                hits_oracle += (ora == *truth) as usize;
                events.read_phases += read_phases(query) as u64;
                if self.log_queries {
                    self.query_log.push(QueryRecord {
                        session,
                        index: i,
                        true_class: *truth,
                        predicted_imc: imc,
                        predicted_oracle: ora,
                    });
                }
            }
            events.queries = data.queries.len();
        }
        let n = events.queries.max(1) as f64;
        let accuracy_imc = hits_imc as f64 / n;
        let accuracy_oracle = hits_oracle as f64 / n;
        let result = SessionResult {
            session,
            classes_seen: self.em.num_classes(),
            n_queries: events.queries,
            accuracy_imc,
            accuracy_oracle,
            degradation: accuracy_oracle - accuracy_imc,
        };
        self.next_session += 1;
        Ok(Some((result, events)))
    }

    pub fn into_parts(self) -> (ExplicitMemory, OracleMemory, Vec<QueryRecord>) {
        (self.em, self.oracle, self.query_log)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub results: Vec<SessionResult>,
    pub events: Vec<SessionEvents>,
    pub memory: ExplicitMemory,
    pub oracle: OracleMemory,
    pub query_log: Vec<QueryRecord>,
}

/// Runs every session, writing and then evaluating each in turn.
pub fn run_protocol<S: SessionSource + ?Sized>(
    spec: &ProtocolSpec,
    source: &mut S,
    setup: &SimSetup,
    seed: u64,
) -> Result<ProtocolRun> {
    let mut runner = ProtocolRunner::new(spec, source, setup, seed)?;
    let mut results = Vec::new();
    let mut events = Vec::new();
    while let Some((r, e)) = runner.step(true)? {
        results.push(r);
        events.push(e);
    }
    let (memory, oracle, query_log) = runner.into_parts();
    Ok(ProtocolRun { results, events, memory, oracle, query_log })
}

/// Operation counts of every session, derived from the workload alone
/// without simulating devices. Saturation warnings are left at zero.
pub fn plan_events<S: SessionSource + ?Sized>(source: &mut S) -> Result<Vec<SessionEvents>> {
    let d = source.dim() as u64;
    let mut seen = BTreeSet::new();
    (0..source.num_sessions())
        .map(|index| {
            let data = source.session(index)?;
            let touched: BTreeSet<ClassId> = data.supports.iter().map(|(c, _)| *c).collect();
            let expansions = touched.iter().filter(|c| !seen.contains(*c)).count();
            seen.extend(touched.iter().copied());
            Ok(SessionEvents {
                session: index as u32 + 1,
                updates: data.supports.len(),
                columns_updated: touched.len(),
                expansions,
                set_pulses: data.supports.len() as u64 * d,
                queries: data.queries.len(),
                read_phases: data.queries.iter().map(|(_, q)| read_phases(q) as u64).sum(),
                saturation_warnings: 0,
            })
        })
        .collect()
}

/// Per-session accuracy gaps `reference - imc`, with the extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSummary {
    pub gaps: Vec<f64>,
    pub worst: f64,
    pub best: f64,
}

pub fn compare_runs(imc: &[f64], reference: &[f64]) -> Result<DegradationSummary> {
    if imc.len() != reference.len() {
        return Err(Error::LengthMismatch { left: imc.len(), right: reference.len() });
    }
    if imc.is_empty() {
        return Err(Error::config("no sessions to compare"));
    }
    let gaps: Vec<f64> = reference.iter().zip(imc).map(|(r, i)| r - i).collect();
    let worst = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DegradationSummary { gaps, worst, best })
}

/// Degradation of one run's analog accuracies against its own oracle.
pub fn summarize_degradation(results: &[SessionResult]) -> Result<DegradationSummary> {
    let imc: Vec<f64> = results.iter().map(|r| r.accuracy_imc).collect();
    let oracle: Vec<f64> = results.iter().map(|r| r.accuracy_oracle).collect();
    compare_runs(&imc, &oracle)
}

/// Session-wise mean over several runs of the same protocol.
pub fn average_results(runs: &[Vec<SessionResult>]) -> Result<Vec<SessionResult>> {
    let first = runs.first().ok_or_else(|| Error::config("no runs to average"))?;
    for r in runs {
        if r.len() != first.len() {
            return Err(Error::LengthMismatch { left: first.len(), right: r.len() });
        }
    }
    let n = runs.len() as f64;
    Ok((0..first.len())
        .map(|k| {
            let mean = |f: fn(&SessionResult) -> f64| runs.iter().map(|r| f(&r[k])).sum::<f64>() / n;
            SessionResult {
                session: first[k].session,
                classes_seen: first[k].classes_seen,
                n_queries: first[k].n_queries,
                accuracy_imc: mean(|r| r.accuracy_imc),
                accuracy_oracle: mean(|r| r.accuracy_oracle),
                degradation: mean(|r| r.degradation),
            }
        })
        .collect())
}

pub const RESULTS_CSV_HEADER: &str = "session,classes_seen,acc_imc,acc_oracle,degradation";

fn write_row<W: Write>(w: &mut W, r: &SessionResult) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{:.6},{:.6},{:.6}",
        r.session, r.classes_seen, r.accuracy_imc, r.accuracy_oracle, r.degradation
    )
}

pub fn write_results_csv<W: Write>(mut w: W, results: &[SessionResult]) -> std::io::Result<()> {
    writeln!(w, "{RESULTS_CSV_HEADER}")?;
    for r in results {
        write_row(&mut w, r)?;
    }
    Ok(())
}

/// Long-format results: one block per seed, then the seed average with
/// `mean` in the seed column.
pub fn write_seeded_results_csv<W: Write>(
    mut w: W,
    per_seed: &[(u64, Vec<SessionResult>)],
    mean: &[SessionResult],
) -> std::io::Result<()> {
    writeln!(w, "seed,{RESULTS_CSV_HEADER}")?;
    for (seed, results) in per_seed {
        for r in results {
            write!(w, "{seed},")?;
            write_row(&mut w, r)?;
        }
    }
    for r in mean {
        write!(w, "mean,")?;
        write_row(&mut w, r)?;
    }
    Ok(())
}

fn parse_row(fields: &[&str], line: u64) -> Result<SessionResult> {
    let bad = |what: &str| Error::Parse { line, msg: format!("bad {what}") };
    if fields.len() != 5 {
        return Err(Error::Parse { line, msg: format!("expected 5 result fields, got {}", fields.len()) });
    }
    Ok(SessionResult {
        session: fields[0].parse().map_err(|_| bad("session"))?,
        classes_seen: fields[1].parse().map_err(|_| bad("classes_seen"))?,
        n_queries: 0,
        accuracy_imc: fields[2].parse().map_err(|_| bad("acc_imc"))?,
        accuracy_oracle: fields[3].parse().map_err(|_| bad("acc_oracle"))?,
        degradation: fields[4].parse().map_err(|_| bad("degradation"))?,
    })
}

/// Reads rows written by [`write_results_csv`]; `n_queries` is not stored
/// and comes back as zero.
pub fn read_results_csv<R: BufRead>(r: R) -> Result<Vec<SessionResult>> {
    read_lines(r, RESULTS_CSV_HEADER, parse_row)
}

/// Reads rows written by [`write_seeded_results_csv`]; the seed is `None`
/// for the mean rows.
pub fn read_seeded_results_csv<R: BufRead>(r: R) -> Result<Vec<(Option<u64>, SessionResult)>> {
    let header = format!("seed,{RESULTS_CSV_HEADER}");
    read_lines(r, &header, |f, line| {
        let seed = match f.first() {
            Some(&"mean") => None,
            Some(s) => Some(s.parse().map_err(|_| Error::Parse { line, msg: format!("bad seed `{s}`") })?),
            None => return Err(Error::Parse { line, msg: "empty row".into() }),
        };
        Ok((seed, parse_row(&f[1..], line)?))
    })
}

fn read_lines<R: BufRead, T>(r: R, header: &str, mut row: impl FnMut(&[&str], u64) -> Result<T>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        if i == 0 {
            if line.trim() != header {
                return Err(Error::Parse { line: 1, msg: format!("expected header `{header}`") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        out.push(row(&fields, lineno)?);
    }
    Ok(out)
}

pub fn write_query_log_csv<W: Write>(mut w: W, log: &[QueryRecord]) -> std::io::Result<()> {
    writeln!(w, "session,query,true_class,pred_imc,pred_oracle")?;
    for q in log {
        writeln!(w, "{},{},{},{},{}", q.session, q.index, q.true_class, q.predicted_imc, q.predicted_oracle)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{SyntheticWorkload, SyntheticWorkloadParams};

    fn small_spec() -> ProtocolSpec {
        ProtocolSpec {
            base_ways: 10,
            base_shots: 3,
            incremental_sessions: 3,
            ways_per_session: 2,
            shots_per_class: 5,
            queries_per_class: 8,
        }
    }

    #[test]
    fn paper_shape_layout() {
        let spec = ProtocolSpec::default();
        assert_eq!(spec.num_sessions(), 9);
        let seen: Vec<usize> = (0..9).map(|k| spec.classes_seen(k)).collect();
        assert_eq!(seen, vec![60, 65, 70, 75, 80, 85, 90, 95, 100]);
        assert_eq!(spec.new_classes(1), (60..65, 5));
        spec.validate(Some(256)).unwrap();
        assert!(spec.validate(Some(99)).is_err());
        assert!(ProtocolSpec { shots_per_class: 0, ..spec }.validate(None).is_err());
    }

    #[test]
    fn singleton_task_is_perfect() {
        let spec = ProtocolSpec {
            base_ways: 1,
            base_shots: 1,
            incremental_sessions: 0,
            ways_per_session: 1,
            shots_per_class: 1,
            queries_per_class: 10,
        };
        let params = SyntheticWorkloadParams { d: 64, flip_prob: 0.0, query_noise: 0.0, seed: 1 };
        let mut w = SyntheticWorkload::new(params, &spec).unwrap();
        let run = run_protocol(&spec, &mut w, &SimSetup::default(), 1).unwrap();
        assert_eq!(run.results.len(), 1);
        assert_eq!(run.results[0].accuracy_imc, 1.0);
        assert_eq!(run.results[0].accuracy_oracle, 1.0);
    }

    #[test]
    fn session_bookkeeping() {
        let spec = small_spec();
        let params = SyntheticWorkloadParams { d: 64, flip_prob: 0.1, query_noise: 0.4, seed: 5 };
        let mut w = SyntheticWorkload::new(params, &spec).unwrap();
        let setup = SimSetup { cols: 32, log_queries: true, ..Default::default() };
        let run = run_protocol(&spec, &mut w, &setup, 5).unwrap();
        for (k, (r, e)) in run.results.iter().zip(&run.events).enumerate() {
            assert_eq!(r.session as usize, k + 1);
            assert_eq!(r.classes_seen, 10 + 2 * k);
            assert_eq!(r.n_queries, r.classes_seen * 8);
            assert_eq!(e.queries, r.n_queries);
            let (updates, cols) = if k == 0 { (30, 10) } else { (10, 2) };
            assert_eq!((e.updates, e.columns_updated, e.expansions), (updates, cols, cols));
            assert_eq!(e.set_pulses, updates as u64 * 64);
            assert!((0.0..=1.0).contains(&r.accuracy_imc));
        }
        assert_eq!(run.memory.num_classes(), 16);
        assert_eq!(run.query_log.len(), run.results.iter().map(|r| r.n_queries).sum::<usize>());
    }

    #[test]
    fn noiseless_devices_do_not_degrade() {
        let spec = small_spec();
        let params = SyntheticWorkloadParams { d: 128, flip_prob: 0.2, query_noise: 0.6, seed: 8 };
        let mut w = SyntheticWorkload::new(params, &spec).unwrap();
        let run = run_protocol(&spec, &mut w, &SimSetup { cols: 16, ..Default::default() }, 8).unwrap();
        assert!(run.results.iter().all(|r| r.degradation == 0.0), "{:?}", run.results);
    }

    #[test]
    fn planned_events_match_simulated() {
        let spec = small_spec();
        let params = SyntheticWorkloadParams { d: 32, seed: 4, ..Default::default() };
        let mut w = SyntheticWorkload::new(params, &spec).unwrap();
        let planned = plan_events(&mut w).unwrap();
        let run = run_protocol(&spec, &mut w, &SimSetup { cols: 16, ..Default::default() }, 4).unwrap();
        assert_eq!(planned, run.events);
    }

    #[test]
    fn runner_can_stop_early() {
        let spec = small_spec();
        let mut w = SyntheticWorkload::new(SyntheticWorkloadParams { d: 32, seed: 2, ..Default::default() }, &spec).unwrap();
        let mut runner = ProtocolRunner::new(&spec, &mut w, &SimSetup { cols: 16, ..Default::default() }, 2).unwrap();
        let (r, e) = runner.step(false).unwrap().unwrap();
        assert_eq!((r.n_queries, e.queries), (0, 0));
        assert_eq!(runner.memory().num_classes(), 10);
        assert_eq!(runner.sessions_done(), 1);
    }

    #[test]
    fn capacity_is_checked_up_front() {
        let spec = small_spec();
        let mut w = SyntheticWorkload::new(SyntheticWorkloadParams { d: 32, seed: 2, ..Default::default() }, &spec).unwrap();
        assert!(matches!(
            run_protocol(&spec, &mut w, &SimSetup { cols: 15, ..Default::default() }, 0),
            Err(Error::ConfigInvalid(_))
        ));
    }

    #[test]
    fn compare_runs_arithmetic() {
        let s = compare_runs(&[0.5, 0.7], &[0.5, 0.7]).unwrap();
        assert_eq!(s.gaps, vec![0.0, 0.0]);
        let s = compare_runs(&[0.0, 0.0], &[0.02, 0.013]).unwrap();
        assert_eq!((s.worst, s.best), (0.02, 0.013));
        assert!(matches!(compare_runs(&[0.1], &[0.1, 0.2]), Err(Error::LengthMismatch { left: 1, right: 2 })));
    }

    #[test]
    fn results_csv_round_trip() {
        let r = |s, acc| SessionResult {
            session: s,
            classes_seen: 60,
            n_queries: 0,
            accuracy_imc: acc,
            accuracy_oracle: 0.9,
            degradation: 0.9 - acc,
        };
        let runs = vec![(1u64, vec![r(1, 0.8), r(2, 0.7)]), (2, vec![r(1, 0.6), r(2, 0.5)])];
        let mean = average_results(&runs.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>()).unwrap();
        assert!((mean[0].accuracy_imc - 0.7).abs() < 1e-12);
        let mut buf = Vec::new();
        write_seeded_results_csv(&mut buf, &runs, &mean).unwrap();
        let back = read_seeded_results_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 6);
        assert_eq!(back[5].0, None);
        assert_eq!(back[2].0, Some(2));
        assert!((back[2].1.accuracy_imc - 0.6).abs() < 1e-9);

        let mut buf = Vec::new();
        write_results_csv(&mut buf, &mean).unwrap();
        assert!(buf.starts_with(b"session,classes_seen,acc_imc,acc_oracle,degradation\n"));
        let back = read_results_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[1].degradation - mean[1].degradation).abs() < 1e-6);
    }
}
