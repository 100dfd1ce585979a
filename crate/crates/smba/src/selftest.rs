//! Quick invariant suite behind `smba selftest`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use smba_core::cone::ConeBaseOracle;
use smba_core::problem::instances::box_problem;
use smba_core::schedule::{ScheduleKind, ScheduleSpec};
use smba_core::solver::{run, SolveStatus, SolverConfig};

use crate::checks::{msa_gradient_error, sandwich_violation, trace_violations};
use crate::error::Result;
use crate::generator::generate_nsdp;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed,
        detail,
    }
}

pub fn run_selftest(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let families = [
        ("orthant", ConeBaseOracle::nonpos_orthant(6)?),
        ("psd", ConeBaseOracle::neg_semidef(4)?),
        ("pcone", ConeBaseOracle::p_cone(5, 2.0)?),
    ];
    for (name, oracle) in &families {
        let v = sandwich_violation(oracle, &mut rng, 300, 1e-12)?;
        out.push(outcome(&format!("sandwich/{name}"), v <= 0.0, format!("worst excess {v:e}")));
        let e = msa_gradient_error(oracle, &mut rng, 50, 1e-3)?;
        out.push(outcome(&format!("gradient/{name}"), e <= 1e-6, format!("worst rel err {e:e}")));
    }

    let mut worst = f64::INFINITY;
    for rbar in [0.33, 0.6, 0.9] {
        let spec = ScheduleSpec::new(ScheduleKind::Power { r: rbar }, 1.0)?;
        for k in [100, 1000] {
            worst = worst.min(spec.partial_sum(k) - spec.partial_sum_lower_bound(k));
        }
    }
    out.push(outcome("schedule/lower-bound", worst >= 0.0, format!("min margin {worst:e}")));

    let prob = box_problem(
        &DVector::from_column_slice(&[2.0, -1.0]),
        &DVector::from_column_slice(&[1.0, 1.0]),
        None,
    )?;
    let cfg = SolverConfig {
        schedule: ScheduleKind::Power { r: 0.9 },
        ..SolverConfig::default()
    };
    let x0 = DVector::zeros(2);
    let report = run(&prob, &cfg, &x0)?;
    let err = (&report.x - DVector::from_column_slice(&[1.0, -1.0])).norm();
    let bad = trace_violations(&prob, &cfg, &x0, &report)?;
    out.push(outcome(
        "solve/box",
        report.status == SolveStatus::Converged && err <= 1e-5 && bad.is_empty(),
        format!("{:?} after {} iterations, error {err:e}, {} violations", report.status, report.iterations, bad.len()),
    ));

    let inst = generate_nsdp(5, 4, seed)?;
    let prob = inst.to_problem()?;
    let cfg = SolverConfig {
        eps: 1e-5,
        ..SolverConfig::default()
    };
    let x0 = DVector::zeros(5);
    let report = run(&prob, &cfg, &x0)?;
    let bad = trace_violations(&prob, &cfg, &x0, &report)?;
    out.push(outcome(
        "solve/nsdp",
        report.status == SolveStatus::Converged && bad.is_empty(),
        format!("{:?} after {} iterations, {} violations", report.status, report.iterations, bad.len()),
    ));
    Ok(out)
}
