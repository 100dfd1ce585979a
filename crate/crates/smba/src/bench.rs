//! Batch driver: one solve per `(seed, rbar, sbar)` cell on generated NSDP
//! instances, run on a rayon pool.
//!
//! The pool size is `SMBA_WORKERS` when set, else the number of available
//! cores. Each cell writes `trace_seed{seed}_r{rbar}_s{sbar}.csv` into the
//! output directory; `summary.csv` lists every cell sorted by
//! `(seed, rbar, sbar)`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smba_core::schedule::ScheduleKind;
use smba_core::solver::{run_with_clock, SolveStatus, SolverConfig};

use crate::clock::StdClock;
use crate::error::{AppError, Result};
use crate::generator::generate_nsdp;
use crate::trace::write_trace;

pub const WORKERS_ENV: &str = "SMBA_WORKERS";

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub n: usize,
    pub m: usize,
    pub seeds: Vec<u64>,
    /// `(rbar, sbar)` pairs.
    pub cells: Vec<(f64, f64)>,
    /// Everything except the schedule, which each cell replaces.
    pub base: SolverConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub rbar: f64,
    pub sbar: f64,
    /// Solver status, or `Error` when the solve could not start.
    pub status: String,
    pub iterations: usize,
    pub psi: f64,
    pub wall_time: f64,
    pub trace: String,
}

impl SummaryRow {
    pub fn converged(&self) -> bool {
        self.status == "Converged"
    }
}

/// Parses `S1..S2` (inclusive) or a single seed.
pub fn parse_seed_range(text: &str) -> Result<Vec<u64>> {
    let bad = || AppError::Invalid(format!("invalid seed range `{text}`, expected S1..S2"));
    match text.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![text.trim().parse().map_err(|_| bad())?]),
    }
}

/// Cartesian product of the two lists, or element-wise pairs when `paired`.
pub fn schedule_cells(rbar: &[f64], sbar: &[f64], paired: bool) -> Result<Vec<(f64, f64)>> {
    if rbar.is_empty() || sbar.is_empty() {
        return Err(AppError::Invalid("rbar and sbar lists must be non-empty".into()));
    }
    if paired {
        if rbar.len() != sbar.len() {
            return Err(AppError::Invalid(format!(
                "paired lists differ in length: {} rbar vs {} sbar",
                rbar.len(),
                sbar.len()
            )));
        }
        return Ok(rbar.iter().copied().zip(sbar.iter().copied()).collect());
    }
    Ok(rbar
        .iter()
        .flat_map(|&r| sbar.iter().map(move |&s| (r, s)))
        .collect())
}

pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(AppError::Invalid(format!(
                "{WORKERS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn trace_file_name(seed: u64, rbar: f64, sbar: f64) -> String {
    format!("trace_seed{seed}_r{rbar}_s{sbar}.csv")
}

fn run_cell(spec: &BenchSpec, seed: u64, rbar: f64, sbar: f64) -> Result<SummaryRow> {
    let inst = generate_nsdp(spec.n, spec.m, seed)?;
    let prob = inst.to_problem()?;
    let cfg = SolverConfig {
        schedule: ScheduleKind::ramped_log(rbar, sbar),
        ..spec.base.clone()
    };
    let name = trace_file_name(seed, rbar, sbar);
    let x0 = nalgebra::DVector::zeros(spec.n);
    let row = match run_with_clock(&prob, &cfg, &x0, &StdClock::start()) {
        Ok(report) => {
            write_trace(&report.trace, &spec.out.join(&name))?;
            if report.status != SolveStatus::Converged {
                log::warn!(
                    "seed {seed}, rbar {rbar}, sbar {sbar}: {:?}: {}",
                    report.status,
                    report.diagnostic.as_deref().unwrap_or("")
                );
            }
            SummaryRow {
                seed,
                rbar,
                sbar,
                status: format!("{:?}", report.status),
                iterations: report.iterations,
                psi: report.psi,
                wall_time: report.wall_time,
                trace: name,
            }
        }
        Err(e) => {
            log::error!("seed {seed}, rbar {rbar}, sbar {sbar}: {e}");
            write_trace(&[], &spec.out.join(&name))?;
            SummaryRow {
                seed,
                rbar,
                sbar,
                status: "Error".into(),
                iterations: 0,
                psi: f64::NAN,
                wall_time: 0.0,
                trace: name,
            }
        }
    };
    Ok(row)
}

/// Runs every cell and writes the traces and `summary.csv` under `spec.out`.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<SummaryRow>> {
    spec.base
        .validate()
        .map_err(|e| AppError::Invalid(format!("solver configuration: {e}")))?;
    for &(rbar, sbar) in &spec.cells {
        ScheduleKind::ramped_log(rbar, sbar).validate()?;
    }
    fs::create_dir_all(&spec.out).map_err(|e| AppError::io(&spec.out, e))?;

    let jobs: Vec<(u64, f64, f64)> = spec
        .seeds
        .iter()
        .flat_map(|&s| spec.cells.iter().map(move |&(r, t)| (s, r, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| AppError::Invalid(format!("cannot start worker pool: {e}")))?;
    let mut rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(seed, r, s)| run_cell(spec, seed, r, s))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|a, b| {
        a.seed
            .cmp(&b.seed)
            .then(a.rbar.total_cmp(&b.rbar))
            .then(a.sbar.total_cmp(&b.sbar))
    });
    write_summary(&rows, &spec.out.join("summary.csv"))?;
    Ok(rows)
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let csv_err = |source| AppError::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let csv_err = |source| AppError::Csv {
        path: path.into(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}
