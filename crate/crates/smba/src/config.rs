//! Solver configuration documents.
//!
//! Every field of [`SolverConfig`] is optional in JSON; missing fields take
//! the defaults. Example:
//!
//! ```json
//! {
//!   "eps": 1e-5,
//!   "schedule": { "variant": "ramped_log", "n0": 300, "nu0": 0.000333222,
//!                 "rbar": 0.9, "sbar": 3.0, "horizon": 5000 },
//!   "warm_start": "barzilai_borwein"
//! }
//! ```

use std::fs;
use std::path::Path;

use smba_core::solver::SolverConfig;

use crate::error::{AppError, Result};

pub fn load_config(path: &Path) -> Result<SolverConfig> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, path: &Path) -> Result<SolverConfig> {
    let cfg: SolverConfig = serde_json::from_str(text).map_err(|e| AppError::json(path, e))?;
    cfg.validate()
        .map_err(|e| AppError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

pub fn save_config(cfg: &SolverConfig, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(cfg).map_err(|e| AppError::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| AppError::io(path, e))
}
