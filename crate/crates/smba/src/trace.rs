//! Per-iteration trace CSV.
//!
//! Columns: `k,psi,g_mu,sigma_b,mu,lambda,Lf,Lg,i_k,j_k,term_step,term_slack,rho,elapsed_s`.
//! The header row is always written; floats use the shortest decimal that
//! parses back to the same value.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use smba_core::solver::TraceRow;

use crate::error::{AppError, Result};

pub const TRACE_COLUMNS: [&str; 14] = [
    "k",
    "psi",
    "g_mu",
    "sigma_b",
    "mu",
    "lambda",
    "Lf",
    "Lg",
    "i_k",
    "j_k",
    "term_step",
    "term_slack",
    "rho",
    "elapsed_s",
];

#[derive(Serialize, Deserialize)]
struct Record {
    k: usize,
    psi: f64,
    g_mu: f64,
    sigma_b: f64,
    mu: f64,
    lambda: f64,
    #[serde(rename = "Lf")]
    lf: f64,
    #[serde(rename = "Lg")]
    lg: f64,
    i_k: usize,
    j_k: usize,
    term_step: f64,
    term_slack: f64,
    rho: f64,
    elapsed_s: f64,
}

impl From<&TraceRow> for Record {
    fn from(r: &TraceRow) -> Self {
        Record {
            k: r.k,
            psi: r.psi,
            g_mu: r.g_mu,
            sigma_b: r.sigma_b,
            mu: r.mu,
            lambda: r.lambda,
            lf: r.lf,
            lg: r.lg,
            i_k: r.i_k,
            j_k: r.j_k,
            term_step: r.term_step,
            term_slack: r.term_slack,
            rho: r.rho,
            elapsed_s: r.elapsed_s,
        }
    }
}

impl From<Record> for TraceRow {
    fn from(r: Record) -> Self {
        TraceRow {
            k: r.k,
            psi: r.psi,
            g_mu: r.g_mu,
            sigma_b: r.sigma_b,
            mu: r.mu,
            lambda: r.lambda,
            lf: r.lf,
            lg: r.lg,
            i_k: r.i_k,
            j_k: r.j_k,
            term_step: r.term_step,
            term_slack: r.term_slack,
            rho: r.rho,
            elapsed_s: r.elapsed_s,
        }
    }
}

pub fn write_trace_to<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for row in rows {
        w.serialize(Record::from(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_from<R: Read>(input: R) -> csv::Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<Record>()
        .map(|rec| rec.map(TraceRow::from))
        .collect()
}

pub fn write_trace(rows: &[TraceRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_trace_to(rows, file).map_err(|source| AppError::Csv {
        path: path.into(),
        source,
    })
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let rows = read_trace_from(file).map_err(|source| AppError::Csv {
        path: path.into(),
        source,
    })?;
    Ok(rows)
}
