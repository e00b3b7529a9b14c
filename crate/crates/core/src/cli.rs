//! `pcm-em` command line.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on configuration or
//! usage errors.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::device::{conductance_curve, write_curve_csv};
use crate::energy::EnergyReport;
use crate::error::Error;
use crate::plot::{line_chart, Series};
use crate::protocol::{
    average_results, plan_events, run_protocol, summarize_degradation, write_query_log_csv, write_results_csv,
    write_seeded_results_csv, ProtocolRunner, SessionResult,
};
use crate::rng::{self, tag};

#[derive(Debug, Parser)]
#[command(name = "pcm-em", version, about = "PCM crossbar explicit-memory simulator")]
pub struct Cli {
    /// TOML run configuration; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` in the config; default `out`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Run a single seed instead of the configured seed list.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Validate the configuration and print the resolved parameters.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the session protocol on the simulated memory and the oracle.
    RunFscl,
    /// Characterize conductance evolution under repeated SET pulses.
    ProgramCurve,
    /// Energy and latency of the configured protocol.
    EnergyReport,
    /// Run the protocol through a session and dump the array state.
    DumpState {
        #[arg(long)]
        after_session: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pcm-em: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(config_err)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    let out_dir = cli.out_dir.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let dataset = cfg.load_dataset().map_err(config_err)?;

    if let Command::DumpState { after_session } = cli.command {
        let n = cfg.protocol.num_sessions();
        if after_session == 0 || after_session > n {
            return Err(CliError::Config(format!("--after-session must be in 1..={n} (got {after_session})")));
        }
    }

    if cli.dry_run {
        println!("# resolved configuration ({:?})", cli.command);
        println!("# out_dir = {}", out_dir.display());
        print!("{}", cfg.to_toml());
        return Ok(());
    }

    fs::create_dir_all(&out_dir).map_err(|e| runtime_err(format!("{}: {e}", out_dir.display())))?;
    match &cli.command {
        Command::RunFscl => run_fscl(&cfg, dataset.as_ref(), &out_dir),
        Command::ProgramCurve => program_curve(&cfg, &out_dir),
        Command::EnergyReport => energy_report(&cfg, dataset.as_ref(), &out_dir),
        Command::DumpState { after_session } => dump_state(&cfg, dataset.as_ref(), *after_session, &out_dir),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime_err(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| runtime_err(format!("{}: {e}", path.display())))
}

fn run_fscl(cfg: &RunConfig, dataset: Option<&crate::workload::EmbeddingDataset>, out: &Path) -> Result<(), CliError> {
    let setup = cfg.sim_setup();
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut source = cfg.workload(dataset, seed)?;
            let run = run_protocol(&cfg.protocol, source.as_mut(), &setup, seed)?;
            Ok((seed, run))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(runtime_err)?;

    let per_seed: Vec<(u64, Vec<SessionResult>)> = runs.iter().map(|(s, r)| (*s, r.results.clone())).collect();
    let mean = average_results(&per_seed.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>()).map_err(runtime_err)?;

    write_file(&out.join("results.csv"), |w| write_seeded_results_csv(w, &per_seed, &mean))?;
    write_file(&out.join("summary.csv"), |w| write_results_csv(w, &mean))?;
    if cfg.output.query_log {
        for (seed, run) in &runs {
            write_file(&out.join(format!("queries_seed{seed}.csv")), |w| write_query_log_csv(w, &run.query_log))?;
        }
    }
    let warnings: usize = runs.iter().flat_map(|(_, r)| &r.events).map(|e| e.saturation_warnings).sum();
    if warnings > 0 {
        eprintln!("pcm-em: warning: {warnings} support writes saturated a device (shots exceed the dynamic range)");
    }

    let pts = |f: fn(&SessionResult) -> f64| mean.iter().map(|r| (r.session as f64, 100.0 * f(r))).collect();
    let svg = line_chart(
        &format!("Accuracy per session ({} seeds)", cfg.seeds.len()),
        "session",
        "accuracy (%)",
        &[
            Series { name: "IMC".into(), color: "blue", points: pts(|r| r.accuracy_imc), errors: None },
            Series { name: "oracle".into(), color: "black", points: pts(|r| r.accuracy_oracle), errors: None },
        ],
    );
    fs::write(out.join("accuracy.svg"), svg).map_err(runtime_err)?;

    println!("session,classes_seen,acc_imc,acc_oracle,degradation");
    for r in &mean {
        println!(
            "{},{},{:.4},{:.4},{:.4}",
            r.session, r.classes_seen, r.accuracy_imc, r.accuracy_oracle, r.degradation
        );
    }
    let summary = summarize_degradation(&mean).map_err(runtime_err)?;
    println!("worst gap {:.4}, best gap {:.4}", summary.worst, summary.best);
    Ok(())
}

fn program_curve(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let seed = cfg.seeds[0];
    let rows = conductance_curve(&cfg.device, cfg.curve.n_devices, cfg.curve.n_pulses, &mut rng::stream(seed, &[tag::CURVE]))
        .map_err(config_err)?;
    write_file(&out.join("curve.csv"), |w| write_curve_csv(w, &rows))?;
    let svg = line_chart(
        &format!("Conductance vs SET pulses ({} devices)", cfg.curve.n_devices),
        "SET pulses",
        "normalized conductance",
        &[Series {
            name: "mean ± 1σ".into(),
            color: "blue",
            points: rows.iter().map(|r| (r.pulse as f64, r.mean)).collect(),
            errors: Some(rows.iter().map(|r| r.std).collect()),
        }],
    );
    fs::write(out.join("curve.svg"), svg).map_err(runtime_err)?;
    for r in &rows {
        println!("{},{:.6},{:.6}", r.pulse, r.mean, r.std);
    }
    Ok(())
}

fn energy_report(cfg: &RunConfig, dataset: Option<&crate::workload::EmbeddingDataset>, out: &Path) -> Result<(), CliError> {
    let mut source = cfg.workload(dataset, cfg.seeds[0]).map_err(runtime_err)?;
    let events = plan_events(source.as_mut()).map_err(runtime_err)?;
    let report = EnergyReport::from_events(&events, cfg.array.rows, &cfg.energy).map_err(config_err)?;
    let text = report.to_text();
    fs::write(out.join("energy_report.txt"), &text).map_err(runtime_err)?;
    write_file(&out.join("energy_report.csv"), |w| report.write_csv(w))?;
    print!("{text}");
    Ok(())
}

fn dump_state(
    cfg: &RunConfig,
    dataset: Option<&crate::workload::EmbeddingDataset>,
    after: usize,
    out: &Path,
) -> Result<(), CliError> {
    let seed = cfg.seeds[0];
    let mut source = cfg.workload(dataset, seed).map_err(runtime_err)?;
    let mut runner = ProtocolRunner::new(&cfg.protocol, source.as_mut(), &cfg.sim_setup(), seed).map_err(runtime_err)?;
    for _ in 0..after {
        runner.step(false).map_err(runtime_err)?;
    }
    let em = runner.memory();
    write_file(&out.join("crossbar.csv"), |w| em.array().write_snapshot_csv(w))?;
    write_file(&out.join("allocation.csv"), |w| em.write_allocation_csv(w))?;
    println!(
        "after session {after}: {} of {} columns allocated",
        em.num_classes(),
        em.array().cols()
    );
    Ok(())
}
