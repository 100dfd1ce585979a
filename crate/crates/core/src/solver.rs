//! The smoothing moving balls approximation outer loop.
//!
//! Each outer iteration `k`:
//!
//! 1. takes `xi_k` in `dP2(x_k)` and warm-starts `(L_f, L_g)`;
//! 2. for `(i, j)` starting at `(0, 0)` solves the ball subproblem with
//!    `L_f = 2^i L_f0`, `L_g = 2^j L_g0` until the trial point is feasible for
//!    `g_mu_k <= 0` and passes the sufficient-descent test (`j += 1` on a
//!    feasibility failure, `i += 1, j += 1` on a descent failure);
//! 3. moves to the accepted point and decreases `mu` along the schedule.
//!
//! Every accepted iterate is strictly feasible: `g_mu_(k+1)(x_(k+1)) <=
//! g_mu_k(x_(k+1)) - alpha4 (mu_k - mu_(k+1)) < 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ball::{build_ball, solve_ball_prox, solve_ball_prox_exact_l1, SubproblemResult};
use crate::cone::{ConePoint, MU_FLOOR};
use crate::diagnostics::{termination_metrics, KktCertificate};
use crate::error::{check_dim, Error, Result};
use crate::problem::DCProblem;
use crate::schedule::{ScheduleKind, ScheduleSpec};

/// Iterates with a norm beyond this are treated as divergence.
pub const DIVERGENCE_NORM: f64 = 1e8;
/// Target relative accuracy of each subproblem's KKT system.
pub const SUBPROBLEM_KKT_TOL: f64 = 1e-8;
const MAX_INITIAL_HALVINGS: u32 = 200;

/// Monotone time source; the core has no clock of its own.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// Clock that always reads zero (keeps traces bitwise reproducible).
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// How `L_f^{k,0}` and `L_g^{k,0}` are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WarmStart {
    /// Barzilai-Borwein curvature estimates with halving fallback.
    BarzilaiBorwein,
    /// The same constants every iteration (clamped into `[l_min, l_max]`).
    Constant { lf: f64, lg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    pub tau1: f64,
    pub tau2: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub eps: f64,
    pub max_outer: usize,
    pub max_inner_j: usize,
    pub schedule: ScheduleKind,
    /// Initial smoothing parameter; searched for when absent.
    pub mu0: Option<f64>,
    /// Use the exact piecewise solve for `l1` subproblems instead of bisection.
    pub exact_l1_path: bool,
    pub warm_start: WarmStart,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau1: 0.01,
            tau2: 0.01,
            l_min: 1e-8,
            l_max: 1e8,
            eps: 1e-7,
            max_outer: 5000,
            max_inner_j: 40,
            schedule: ScheduleKind::ramped_log(0.9, 3.0),
            mu0: None,
            exact_l1_path: false,
            warm_start: WarmStart::BarzilaiBorwein,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("l_min", self.l_min),
            ("l_max", self.l_max),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.l_min > self.l_max {
            return Err(Error::InvalidArgument(format!(
                "l_min ({}) exceeds l_max ({})",
                self.l_min, self.l_max
            )));
        }
        if let Some(mu0) = self.mu0 {
            if !(mu0 > 0.0) || !mu0.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "mu0 must be positive and finite, got {mu0}"
                )));
            }
        }
        if let WarmStart::Constant { lf, lg } = self.warm_start {
            if !(lf > 0.0) || !(lg > 0.0) {
                return Err(Error::InvalidArgument(
                    "constant warm start needs positive constants".into(),
                ));
            }
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolveStatus {
    Converged,
    MaxOuter,
    InnerCapExceeded,
    NumericFailure,
}

/// One accepted outer iteration: values at `x_(k+1)` and the `mu_k`, `lambda_(k+1)`,
/// `(L_f, L_g)` and `(i_k, j_k)` that produced it. `g_mu` is
/// `g_mu_(k+1)(x_(k+1))`, the strictly negative value the next step starts from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub k: usize,
    pub psi: f64,
    pub g_mu: f64,
    pub sigma_b: f64,
    pub mu: f64,
    pub lambda: f64,
    pub lf: f64,
    pub lg: f64,
    pub i_k: usize,
    pub j_k: usize,
    pub term_step: f64,
    pub term_slack: f64,
    pub rho: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    /// Certificate of the last accepted step.
    pub final_kkt: Option<KktCertificate>,
    pub x: DVector<f64>,
    pub psi: f64,
    pub mu0: f64,
    pub wall_time: f64,
    pub subproblem_tolerance: f64,
    pub warnings: Vec<String>,
    /// Explanation attached to any status other than `Converged`.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PreviousIterate {
    pub x: DVector<f64>,
    pub grad_f: DVector<f64>,
    /// `grad g_mu_(k-1)(x_(k-1))`.
    pub grad_gmu: DVector<f64>,
    pub lf0: f64,
    pub lg0: f64,
}

/// Solver state at the start of outer iteration `k`.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: DVector<f64>,
    pub k: usize,
    pub mu: f64,
    /// Multiplier accepted at the previous iteration (zero at `k = 0`).
    pub lambda: f64,
    pub lf: f64,
    pub lg: f64,
    pub psi: f64,
    pub gmu: f64,
    pub grad_f: DVector<f64>,
    pub grad_gmu: DVector<f64>,
    pub point: ConePoint,
    pub prev: Option<PreviousIterate>,
}

impl IterateState {
    pub fn initial(prob: &DCProblem, x0: &DVector<f64>, mu0: f64) -> Result<Self> {
        let point = prob.constraint_point(x0)?;
        let gmu = point.msa_value(mu0)?;
        if !(gmu < 0.0) {
            return Err(Error::Infeasible(format!(
                "g_mu(x0) = {gmu:e} is not negative for mu = {mu0:e}"
            )));
        }
        Ok(Self {
            x: x0.clone(),
            k: 0,
            mu: mu0,
            lambda: 0.0,
            lf: 1.0,
            lg: 1.0,
            psi: prob.objective_value(x0)?,
            gmu,
            grad_f: prob.objective_f_gradient(x0)?,
            grad_gmu: prob.composite_gradient_at(x0, &point, mu0)?,
            point,
            prev: None,
        })
    }
}

/// `mu0 = 0.9 * 2^-l` for the first `l >= 0` with `g_mu0(x0) <= 0.1 g_B(x0)`.
pub fn find_initial_mu(prob: &DCProblem, x0: &DVector<f64>) -> Result<f64> {
    let point = prob.constraint_point(x0)?;
    let g_b = point.support();
    if !(g_b < 0.0) {
        return Err(Error::Initialization(format!(
            "x0 is not strictly feasible: sigma_B(G(x0)) = {g_b:e}"
        )));
    }
    for l in 0..=MAX_INITIAL_HALVINGS {
        let mu = 0.9 * 2f64.powi(-(l as i32));
        if point.msa_value(mu)? <= 0.1 * g_b {
            return Ok(mu);
        }
    }
    Err(Error::Numeric(format!(
        "no initial mu found within {MAX_INITIAL_HALVINGS} halvings"
    )))
}

/// Barzilai-Borwein warm starts for `(L_f^{k,0}, L_g^{k,0})`.
pub fn bb_init(state: &IterateState, cfg: &SolverConfig) -> (f64, f64) {
    let Some(prev) = &state.prev else {
        return (1.0, 1.0);
    };
    let in_range = |v: f64| v >= cfg.l_min && v <= cfg.l_max;
    let dx = &state.x - &prev.x;
    let dx_sq = dx.norm_squared();

    let df = &state.grad_f - &prev.grad_f;
    let lf_bb = dx.dot(&df).abs() / dx_sq;
    let lf0 = if dx_sq.sqrt() > 1e-12 && in_range(lf_bb) {
        lf_bb
    } else {
        cfg.l_min.max(0.5 * prev.lf0)
    };

    let dg = (&state.grad_gmu - &prev.grad_gmu) * state.mu;
    let cross = dx.dot(&dg).abs();
    let lg_bb = dg.norm_squared() / cross;
    let lg0 = if cross.sqrt() > 1e-12 && in_range(lg_bb) {
        lg_bb
    } else {
        cfg.l_min.max(0.5 * prev.lg0)
    };
    (lf0, lg0)
}

/// Accepted trial of the `(i, j)` linesearch.
#[derive(Debug, Clone)]
pub struct InnerStep {
    pub x: DVector<f64>,
    pub lambda: f64,
    pub lf: f64,
    pub lg: f64,
    pub i: usize,
    pub j: usize,
    pub psi: f64,
    /// `g_mu_k(x)` at the accepted point.
    pub gmu: f64,
    pub point: ConePoint,
    pub subproblem: SubproblemResult,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum InnerOutcome {
    Accepted(InnerStep),
    /// `j` exceeded the cap; carries a diagnostic dump.
    CapExceeded(String),
}

/// Runs the `(i, j)` doubling linesearch of one outer iteration.
pub fn inner_loop_step(
    state: &IterateState,
    prob: &DCProblem,
    cfg: &SolverConfig,
    xi: &DVector<f64>,
    lf0: f64,
    lg0: f64,
) -> Result<InnerOutcome> {
    check_dim("subgradient", state.x.len(), xi.len())?;
    let q = &state.grad_f - xi;
    let mu = state.mu;
    let (mut i, mut j) = (0usize, 0usize);
    let mut rejected: Vec<(f64, f64)> = Vec::new();
    loop {
        if j > cfg.max_inner_j {
            let mut msg = format!(
                "linesearch exceeded j = {} at k = {}: mu = {mu:e}, g_mu(x_k) = {:e}, L_g0 = {lg0:e}; (L_g, g_mu(trial)):",
                cfg.max_inner_j, state.k, state.gmu
            );
            for (lg, g) in rejected.iter().rev().take(5) {
                msg.push_str(&format!(" ({lg:e}, {g:e})"));
            }
            return Ok(InnerOutcome::CapExceeded(msg));
        }
        let lf = lf0 * 2f64.powi(i as i32);
        let lg = lg0 * 2f64.powi(j as i32);
        let ball = build_ball(&state.x, &state.grad_gmu, state.gmu, lg, mu)?;
        let sub = if cfg.exact_l1_path {
            solve_ball_prox_exact_l1(prob.regularizer(), &q, lf, &ball)?
        } else {
            solve_ball_prox(prob.regularizer(), &q, lf, &ball)?
        };
        let point = prob.constraint_point(&sub.x)?;
        let gmu = point.msa_value(mu)?;
        if gmu <= 0.0 {
            let psi = prob.objective_value(&sub.x)?;
            let decrease = (cfg.tau1 * mu + cfg.tau2 * sub.lambda) / (2.0 * mu)
                * (&sub.x - &state.x).norm_squared();
            if psi <= state.psi - decrease {
                return Ok(InnerOutcome::Accepted(InnerStep {
                    x: sub.x.clone(),
                    lambda: sub.lambda,
                    lf,
                    lg,
                    i,
                    j,
                    psi,
                    gmu,
                    point,
                    subproblem: sub,
                }));
            }
            i += 1;
        }
        rejected.push((lg, gmu));
        j += 1;
    }
}

/// Runs the method from a strictly feasible `x0`.
pub fn run(prob: &DCProblem, cfg: &SolverConfig, x0: &DVector<f64>) -> Result<SolveReport> {
    run_with_clock(prob, cfg, x0, &NoClock)
}

pub fn run_with_clock(
    prob: &DCProblem,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    clock: &dyn Clock,
) -> Result<SolveReport> {
    cfg.validate()?;
    check_dim("initial point", prob.dim(), x0.len())?;
    let start = clock.elapsed_secs();

    let g_b = prob.support_at(x0)?;
    if !(g_b < 0.0) {
        return Err(Error::Initialization(format!(
            "x0 is not strictly feasible: sigma_B(G(x0)) = {g_b:e}"
        )));
    }
    let mu0 = match cfg.mu0 {
        Some(mu0) => mu0,
        None => find_initial_mu(prob, x0)?,
    };
    let schedule = ScheduleSpec::new(cfg.schedule, mu0)?;
    let mut state = IterateState::initial(prob, x0, mu0).map_err(|e| match e {
        Error::Infeasible(msg) => Error::Initialization(msg),
        other => other,
    })?;

    let mut report = SolveReport {
        status: SolveStatus::MaxOuter,
        iterations: 0,
        trace: Vec::new(),
        final_kkt: None,
        x: x0.clone(),
        psi: state.psi,
        mu0,
        wall_time: 0.0,
        subproblem_tolerance: SUBPROBLEM_KKT_TOL,
        warnings: Vec::new(),
        diagnostic: None,
    };
    let mut lf0_prev = 1.0;
    let mut lg0_prev = 1.0;
    let mut floor_warned = false;

    let outcome: Result<()> = (|| {
        while state.k < cfg.max_outer {
            let xi = prob.concave_subgradient(&state.x)?;
            if let Some(prev) = state.prev.as_mut() {
                prev.lf0 = lf0_prev;
                prev.lg0 = lg0_prev;
            }
            let (lf0, lg0) = match cfg.warm_start {
                WarmStart::BarzilaiBorwein => bb_init(&state, cfg),
                WarmStart::Constant { lf, lg } => (
                    lf.clamp(cfg.l_min, cfg.l_max),
                    lg.clamp(cfg.l_min, cfg.l_max),
                ),
            };
            lf0_prev = lf0;
            lg0_prev = lg0;

            let step = match inner_loop_step(&state, prob, cfg, &xi, lf0, lg0)? {
                InnerOutcome::Accepted(step) => step,
                InnerOutcome::CapExceeded(msg) => {
                    report.status = SolveStatus::InnerCapExceeded;
                    report.diagnostic = Some(msg);
                    return Ok(());
                }
            };

            let mu = state.mu;
            let v = step.point.msa_gradient(mu)? * step.lambda;
            let u = prob.objective_f_gradient(&step.x)? - &xi
                + prob.constraint().adjoint_apply(&step.x, &v);
            let rho = prob.regularizer().subdiff_distance(&step.x, &u)?;
            let (term_step, term_slack) = termination_metrics(
                cfg.tau1,
                cfg.tau2,
                mu,
                step.lambda,
                &state.x,
                &step.x,
                step.point.y(),
                &v,
            );
            let sigma_b = step.point.support();
            let dist = (&step.x - &state.x).norm();

            let mut mu_next = schedule.mu_at(state.k as u64 + 1);
            if mu_next < MU_FLOOR {
                if !floor_warned {
                    report.warnings.push(format!(
                        "mu reached the floor {MU_FLOOR:e} at k = {}",
                        state.k + 1
                    ));
                    floor_warned = true;
                }
                mu_next = MU_FLOOR;
            }
            let gmu_next = step.point.msa_value(mu_next)?;

            report.trace.push(TraceRow {
                k: state.k,
                psi: step.psi,
                g_mu: gmu_next,
                sigma_b,
                mu,
                lambda: step.lambda,
                lf: step.lf,
                lg: step.lg,
                i_k: step.i,
                j_k: step.j,
                term_step,
                term_slack,
                rho,
                elapsed_s: clock.elapsed_secs() - start,
            });
            let complementarity = -v.dot(step.point.y());
            report.final_kkt = Some(KktCertificate {
                rho,
                complementarity,
                step: dist,
                v,
                eps_triple: (rho, complementarity, dist),
            });
            report.x = step.x.clone();
            report.psi = step.psi;
            report.iterations = report.trace.len();

            if sigma_b > 0.0 {
                return Err(Error::Numeric(format!(
                    "accepted iterate leaves the cone: sigma_B = {sigma_b:e}"
                )));
            }
            if !(gmu_next < 0.0) {
                return Err(Error::Numeric(format!(
                    "feasibility chain broken: g_mu(x) = {gmu_next:e} at mu = {mu_next:e}"
                )));
            }
            let ledger = (cfg.tau1 * mu + cfg.tau2 * step.lambda) / (2.0 * mu) * dist * dist;
            if step.psi + ledger > state.psi + 1e-12 * (1.0 + state.psi.abs()) {
                return Err(Error::Numeric(format!(
                    "descent ledger violated at k = {}",
                    state.k
                )));
            }
            if term_step <= cfg.eps && term_slack <= cfg.eps {
                report.status = SolveStatus::Converged;
                return Ok(());
            }
            if step.x.norm() > DIVERGENCE_NORM {
                return Err(Error::Numeric(format!(
                    "iterate norm exceeded {DIVERGENCE_NORM:e}; the level set may be unbounded"
                )));
            }

            let grad_gmu_next = prob.composite_gradient_at(&step.x, &step.point, mu_next)?;
            let grad_f_next = prob.objective_f_gradient(&step.x)?;

            let old_x = core::mem::replace(&mut state.x, step.x);
            let old_grad_f = core::mem::replace(&mut state.grad_f, grad_f_next);
            let old_grad_gmu = core::mem::replace(&mut state.grad_gmu, grad_gmu_next);
            state.prev = Some(PreviousIterate {
                x: old_x,
                grad_f: old_grad_f,
                grad_gmu: old_grad_gmu,
                lf0,
                lg0,
            });
            state.k += 1;
            state.mu = mu_next;
            state.lambda = step.lambda;
            state.lf = step.lf;
            state.lg = step.lg;
            state.psi = step.psi;
            state.gmu = gmu_next;
            state.point = step.point;
        }
        report.status = SolveStatus::MaxOuter;
        report.diagnostic = Some(format!("reached {} outer iterations", cfg.max_outer));
        Ok(())
    })();

    if let Err(e) = outcome {
        report.status = SolveStatus::NumericFailure;
        report.diagnostic = Some(format!("{e}"));
    }
    report.iterations = report.trace.len();
    report.wall_time = clock.elapsed_secs() - start;
    Ok(report)
}
