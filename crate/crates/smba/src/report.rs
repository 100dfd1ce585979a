//! JSON solve reports.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use smba_core::problem::DCProblem;
use smba_core::solver::{SolveReport, SolveStatus};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktDoc {
    pub rho: f64,
    pub complementarity: f64,
    pub step: f64,
    /// Distance of `v` to the polar cone.
    pub polar_violation: f64,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub status: SolveStatus,
    pub iterations: usize,
    pub psi: f64,
    pub sigma_b: f64,
    pub mu0: f64,
    pub term_step: Option<f64>,
    pub term_slack: Option<f64>,
    pub wall_time: f64,
    pub subproblem_tolerance: f64,
    pub x: Vec<f64>,
    pub kkt: Option<KktDoc>,
    pub warnings: Vec<String>,
    pub diagnostic: Option<String>,
}

impl ReportDoc {
    pub fn new(prob: &DCProblem, report: &SolveReport) -> Result<Self> {
        let kkt = match &report.final_kkt {
            Some(c) => Some(KktDoc {
                rho: c.rho,
                complementarity: c.complementarity,
                step: c.step,
                polar_violation: prob.cone().polar_violation(&c.v)?,
                v: c.v.as_slice().to_vec(),
            }),
            None => None,
        };
        let last = report.trace.last();
        Ok(ReportDoc {
            status: report.status,
            iterations: report.iterations,
            psi: report.psi,
            sigma_b: prob.support_at(&report.x)?,
            mu0: report.mu0,
            term_step: last.map(|r| r.term_step),
            term_slack: last.map(|r| r.term_slack),
            wall_time: report.wall_time,
            subproblem_tolerance: report.subproblem_tolerance,
            x: report.x.as_slice().to_vec(),
            kkt,
            warnings: report.warnings.clone(),
            diagnostic: report.diagnostic.clone(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| AppError::json(path, e))?;
        fs::write(path, text + "\n").map_err(|e| AppError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::json(path, e))
    }
}
