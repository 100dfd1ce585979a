//! Randomized invariant checks shared by `smba selftest` and the test suites.
//!
//! Each check returns the worst observed violation (`<= 0` means the property
//! held at every sample) so callers can both gate and report.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use smba_core::cone::{ConeBaseOracle, ConeFamily};
use smba_core::problem::DCProblem;
use smba_core::solver::{SolveReport, SolveStatus, SolverConfig};

use crate::error::Result;

/// A random element of `Y` with entries in `[-scale, scale]` (symmetric for
/// the semidefinite family).
pub fn random_point(oracle: &ConeBaseOracle, rng: &mut ChaCha20Rng, scale: f64) -> DVector<f64> {
    match oracle.family() {
        ConeFamily::NegSemidef { m } => {
            let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-scale..=scale));
            let s = (&a + a.transpose()) * 0.5;
            DVector::from_column_slice(s.as_slice())
        }
        _ => DVector::from_fn(oracle.dim(), |_, _| rng.random_range(-scale..=scale)),
    }
}

/// Log-uniform draw from `[lo, hi]`.
pub fn random_mu(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Worst violation of `sigma_B <= h_mu <= sigma_B + alpha3 mu` and
/// `h_mu1 <= h_mu0 - alpha4 (mu0 - mu1)`, each measured relative to
/// `1 + |sigma_B|` and offset by `rel_tol`.
pub fn sandwich_violation(
    oracle: &ConeBaseOracle,
    rng: &mut ChaCha20Rng,
    samples: usize,
    rel_tol: f64,
) -> Result<f64> {
    let cert = oracle.cert();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let scale = random_mu(rng, 1e-2, 1e2);
        let y = random_point(oracle, rng, scale);
        let mu0 = random_mu(rng, 1e-6, 1e1);
        let mu1 = mu0 * rng.random_range(0.0..1.0);
        let point = oracle.evaluate(&y)?;
        let s = point.support();
        let h0 = point.msa_value(mu0)?;
        let unit = 1.0 + s.abs();
        let mut v = ((s - h0) / unit).max((h0 - s - cert.alpha3 * mu0) / unit);
        if mu1 > 0.0 {
            let h1 = point.msa_value(mu1)?;
            v = v.max((h1 - h0 + cert.alpha4 * (mu0 - mu1)) / unit);
        }
        worst = worst.max(v - rel_tol);
    }
    Ok(worst)
}

/// Fourth-order central difference of `f` at `t = 0`.
pub fn central_difference(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Worst relative error of directional derivatives of `h_mu` against
/// finite differences, for `mu` in `[mu_min, 1]`.
pub fn msa_gradient_error(
    oracle: &ConeBaseOracle,
    rng: &mut ChaCha20Rng,
    samples: usize,
    mu_min: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let y = random_point(oracle, rng, 5.0);
        let dir = random_point(oracle, rng, 1.0);
        let dir = &dir / dir.norm().max(f64::MIN_POSITIVE);
        let mu = random_mu(rng, mu_min, 1.0);
        let g = oracle.msa_gradient(&y, mu)?;
        let fd = central_difference(
            |t| oracle.msa_value(&(&y + &dir * t), mu).unwrap_or(f64::NAN),
            1e-2 * mu,
        );
        let e = rel_err(g.dot(&dir), fd);
        worst = worst.max(if e.is_nan() { f64::INFINITY } else { e });
    }
    Ok(worst)
}

/// Same as [`msa_gradient_error`] for `g_mu = h_mu o G` at points drawn
/// around `center`.
pub fn composite_gradient_error(
    prob: &DCProblem,
    center: &DVector<f64>,
    rng: &mut ChaCha20Rng,
    samples: usize,
    mu_min: f64,
) -> Result<f64> {
    let n = prob.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = center + DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let dir: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let dir = &dir / dir.norm().max(f64::MIN_POSITIVE);
        let mu = random_mu(rng, mu_min, 1.0);
        let g = prob.composite_gradient(&x, mu)?;
        // step relative to the curvature of g_mu along dir
        let jd = prob.constraint_value(&(&x + &dir))? - prob.constraint_value(&x)?;
        let h = 1e-2 * mu / jd.norm().max(1e-3);
        let fd = central_difference(
            |t| prob.composite_value(&(&x + &dir * t), mu).unwrap_or(f64::NAN),
            h,
        );
        let e = rel_err(g.dot(&dir), fd);
        worst = worst.max(if e.is_nan() { f64::INFINITY } else { e });
    }
    Ok(worst)
}

/// Checks the per-iteration guarantees recorded in a trace: strict
/// feasibility, `i_k <= j_k <= max_inner_j`, and the descent ledger
/// `psi_(k+1) + (tau1 mu + tau2 lambda) / (2 mu) ||x_(k+1) - x_k||^2 <= psi_k`
/// up to `1e-10 (1 + |psi_k|)`.
///
/// The trace stores the scaled step metric rather than the raw step, so the
/// ledger term is bounded below by `mu / 2 * term_step^2`; the solver itself
/// enforces the exact inequality and reports `NumericFailure` otherwise.
pub fn trace_violations(
    prob: &DCProblem,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    report: &SolveReport,
) -> Result<Vec<String>> {
    let mut out = Vec::new();
    if report.status == SolveStatus::NumericFailure {
        out.push(format!(
            "numeric failure: {}",
            report.diagnostic.as_deref().unwrap_or("")
        ));
    }
    let mut psi_prev = prob.objective_value(x0)?;
    for row in &report.trace {
        if !(row.g_mu < 0.0) {
            out.push(format!("k = {}: g_mu = {:e}", row.k, row.g_mu));
        }
        if !(row.sigma_b <= 0.0) {
            out.push(format!("k = {}: sigma_B = {:e}", row.k, row.sigma_b));
        }
        if !(row.i_k <= row.j_k && row.j_k <= cfg.max_inner_j) {
            out.push(format!("k = {}: (i, j) = ({}, {})", row.k, row.i_k, row.j_k));
        }
        let ledger = row.mu / 2.0 * row.term_step * row.term_step;
        if row.psi + ledger > psi_prev + 1e-10 * (1.0 + psi_prev.abs()) {
            out.push(format!(
                "k = {}: descent ledger {} + {} > {}",
                row.k, row.psi, ledger, psi_prev
            ));
        }
        psi_prev = row.psi;
    }
    Ok(out)
}
