//! The single-ball proximal subproblem
//!
//! ```text
//! min  P1(x) + <q, x - x_k> + L_f/2 ||x - x_k||^2
//! s.t. (L_g / 2mu) (||x - w||^2 - R^2) <= 0
//! ```
//!
//! solved through its Lagrange multiplier: for a multiplier `lambda` the
//! Lagrangian minimizer is a single prox step, and `||x(lambda) - w||` is
//! nonincreasing in `lambda`, so the multiplier is found by a one-dimensional
//! root search.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::problem::ProxRegularizer;

const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 400;
/// `-phi(lambda) <= PHI_TOL * |g|` ends the bisection.
const PHI_TOL: f64 = 1e-12;
const WIDTH_TOL: f64 = 1e-14;

/// The quadratic model `g + <grad, x - x_k> + (curvature/2) ||x - x_k||^2 <= 0`
/// of the smoothed constraint around `x_k`, i.e. the ball
/// `B(x_k - grad / curvature, sqrt(||grad||^2 - 2 curvature g) / curvature)`.
///
/// The model is kept in this anchored form rather than as center and radius:
/// when `g` is tiny and `curvature` small, the radius is huge and the margin
/// around `x_k` would vanish in rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct BallConstraint {
    pub anchor: DVector<f64>,
    pub grad: DVector<f64>,
    pub value: f64,
    pub curvature: f64,
}

impl BallConstraint {
    /// `B(center, radius)` with quadratic weight `curvature`, linearized at `anchor`.
    pub fn from_center(
        anchor: DVector<f64>,
        center: &DVector<f64>,
        radius: f64,
        curvature: f64,
    ) -> Result<Self> {
        check_dim("ball center", anchor.len(), center.len())?;
        let offset = &anchor - center;
        let value = 0.5 * curvature * (offset.norm_squared() - radius * radius);
        Ok(Self {
            grad: offset * curvature,
            anchor,
            value,
            curvature,
        })
    }

    pub fn center(&self) -> DVector<f64> {
        &self.anchor - &self.grad / self.curvature
    }

    pub fn radius(&self) -> f64 {
        self.radius_sq().max(0.0).sqrt()
    }

    fn radius_sq(&self) -> f64 {
        (self.grad.norm_squared() - 2.0 * self.curvature * self.value)
            / (self.curvature * self.curvature)
    }

    /// Model value at `x`.
    pub fn constraint_value(&self, x: &DVector<f64>) -> f64 {
        self.displaced_value(&(x - &self.anchor))
    }

    /// Model value at `anchor + d`.
    pub fn displaced_value(&self, d: &DVector<f64>) -> f64 {
        self.value + self.grad.dot(d) + 0.5 * self.curvature * d.norm_squared()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemResult {
    pub x: DVector<f64>,
    /// Multiplier of the quadratic model constraint.
    pub lambda: f64,
    pub stationarity_residual: f64,
    /// `lambda` times the model value at `x`.
    pub complementarity: f64,
    pub iterations_rootfind: usize,
}

/// Builds the ball from the linearization of `g_mu` at `x_k`; its center is
/// `x_k - (mu/L_g) grad` and its radius `(mu/L_g) sqrt(||grad||^2 - 2 (L_g/mu) g)`.
pub fn build_ball(
    x_k: &DVector<f64>,
    grad_gmu: &DVector<f64>,
    gmu_val: f64,
    l_g: f64,
    mu: f64,
) -> Result<BallConstraint> {
    check_dim("smoothed constraint gradient", x_k.len(), grad_gmu.len())?;
    if !(l_g > 0.0) || !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball needs L_g > 0 and mu > 0, got L_g = {l_g}, mu = {mu}"
        )));
    }
    if !(gmu_val < 0.0) {
        return Err(Error::Infeasible(format!(
            "smoothed constraint value {gmu_val:e} is not negative"
        )));
    }
    Ok(BallConstraint {
        anchor: x_k.clone(),
        grad: grad_gmu.clone(),
        value: gmu_val,
        curvature: l_g / mu,
    })
}

/// Minimizer of the Lagrangian at multiplier `lambda`:
/// `prox_{P1/t}(x_k - (q + lambda grad) / t)` with `t = L_f + lambda curvature`.
pub fn prox_path_point(
    p1: &ProxRegularizer,
    q: &DVector<f64>,
    l_f: f64,
    ball: &BallConstraint,
    lambda: f64,
) -> Result<DVector<f64>> {
    check_dim("linear term", ball.anchor.len(), q.len())?;
    check_dim("ball gradient", ball.anchor.len(), ball.grad.len())?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "multiplier must be nonnegative, got {lambda}"
        )));
    }
    Ok(&ball.anchor + path_displacement(p1, q, l_f, ball, lambda)?)
}

fn path_displacement(
    p1: &ProxRegularizer,
    q: &DVector<f64>,
    l_f: f64,
    ball: &BallConstraint,
    lambda: f64,
) -> Result<DVector<f64>> {
    let t = l_f + lambda * ball.curvature;
    let delta = -(q + &ball.grad * lambda) / t;
    p1.prox_displacement(&ball.anchor, &delta, 1.0 / t)
}

/// Solves the subproblem by safeguarded bisection on the multiplier.
pub fn solve_ball_prox(
    p1: &ProxRegularizer,
    q: &DVector<f64>,
    l_f: f64,
    ball: &BallConstraint,
) -> Result<SubproblemResult> {
    validate(q, l_f, ball)?;
    let phi = |lambda: f64| -> Result<(DVector<f64>, f64)> {
        let d = path_displacement(p1, q, l_f, ball, lambda)?;
        let v = ball.displaced_value(&d);
        Ok((d, v))
    };

    let (d0, phi0) = phi(0.0)?;
    if phi0 <= 0.0 {
        return Ok(finish(p1, q, l_f, ball, d0, 0.0, 0));
    }

    let mut evals = 1;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let (mut d_hi, mut phi_hi) = phi(hi)?;
    evals += 1;
    let mut doublings = 0;
    while phi_hi > 0.0 {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::Numeric(format!(
                "multiplier bracket not found after {MAX_DOUBLINGS} doublings \
                 (lambda = {hi:e}, phi = {phi_hi:e}, radius = {:e})",
                ball.radius()
            )));
        }
        lo = hi;
        hi *= 2.0;
        (d_hi, phi_hi) = phi(hi)?;
        evals += 1;
    }

    // invariant: phi(lo) > 0 >= phi(hi); the feasible end is returned
    let tol = PHI_TOL * ball.value.abs();
    for _ in 0..MAX_BISECTIONS {
        if -phi_hi <= tol || hi - lo <= WIDTH_TOL * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (d_mid, phi_mid) = phi(mid)?;
        evals += 1;
        if phi_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            d_hi = d_mid;
            phi_hi = phi_mid;
        }
    }
    Ok(finish(p1, q, l_f, ball, d_hi, hi, evals))
}

/// Exact solve for `P1 = l1`. Between consecutive breakpoints of the
/// soft-thresholding pattern the active coordinates move as
/// `d_A = (e_A - lambda grad_A) / t` and the inactive ones sit at zero, so the
/// model value vanishes at
/// `t^2 = ||L_f grad_A + c e_A||^2 / (||grad_A||^2 - 2 c c0)`
/// with `c` the curvature and `c0` the model value at the inactive part.
pub fn solve_ball_prox_exact_l1(
    p1: &ProxRegularizer,
    q: &DVector<f64>,
    l_f: f64,
    ball: &BallConstraint,
) -> Result<SubproblemResult> {
    validate(q, l_f, ball)?;
    let n = ball.anchor.len();
    let weights = match p1 {
        ProxRegularizer::L1(w) => w.clone(),
        ProxRegularizer::Zero => DVector::zeros(n),
    };
    check_dim("l1 weights", n, weights.len())?;

    let phi = |lambda: f64| -> Result<(DVector<f64>, f64)> {
        let d = path_displacement(p1, q, l_f, ball, lambda)?;
        let v = ball.displaced_value(&d);
        Ok((d, v))
    };
    let (d0, phi0) = phi(0.0)?;
    if phi0 <= 0.0 {
        return Ok(finish(p1, q, l_f, ball, d0, 0.0, 0));
    }

    let (x_k, g, c) = (&ball.anchor, &ball.grad, ball.curvature);
    // the prox argument scaled by t is base + lambda * slope
    let base = x_k * l_f - q;
    let slope = x_k * c - g;

    let mut breaks: Vec<f64> = Vec::new();
    for i in 0..n {
        if slope[i] != 0.0 {
            for target in [weights[i], -weights[i]] {
                let lambda = (target - base[i]) / slope[i];
                if lambda > 0.0 && lambda.is_finite() {
                    breaks.push(lambda);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut lo = 0.0;
    let mut pieces = 0;
    for k in 0..=breaks.len() {
        pieces += 1;
        let hi = breaks.get(k).copied().unwrap_or(f64::INFINITY);
        if hi.is_finite() && phi(hi)?.1 > 0.0 {
            lo = hi;
            continue;
        }
        // the root lies in [lo, hi]; freeze the activity pattern inside
        let probe = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 };
        let mut num = DVector::zeros(n);
        let mut h = 0.0;
        let mut c0 = ball.value;
        for i in 0..n {
            let arg = base[i] + probe * slope[i];
            if arg.abs() > weights[i] {
                let e = -q[i] - weights[i] * arg.signum();
                num[i] = l_f * g[i] + c * e;
                h += g[i] * g[i];
            } else {
                c0 += -g[i] * x_k[i] + 0.5 * c * x_k[i] * x_k[i];
            }
        }
        let num = num.norm_squared();
        let den = h - 2.0 * c * c0;
        let lambda = if num == 0.0 {
            lo
        } else if den > 0.0 {
            (((num / den).sqrt() - l_f) / c).clamp(lo, hi)
        } else {
            hi
        };
        if !lambda.is_finite() {
            break;
        }
        let (d, _) = phi(lambda)?;
        return Ok(finish(p1, q, l_f, ball, d, lambda, pieces));
    }
    Err(Error::Numeric("exact l1 path found no root".into()))
}

fn validate(q: &DVector<f64>, l_f: f64, ball: &BallConstraint) -> Result<()> {
    check_dim("linear term", ball.anchor.len(), q.len())?;
    check_dim("ball gradient", ball.anchor.len(), ball.grad.len())?;
    let r2 = ball.radius_sq();
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got squared radius {r2}"
        )));
    }
    if !(l_f > 0.0) || !(ball.curvature > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need L_f > 0 and curvature > 0, got {l_f} and {}",
            ball.curvature
        )));
    }
    Ok(())
}

fn finish(
    p1: &ProxRegularizer,
    q: &DVector<f64>,
    l_f: f64,
    ball: &BallConstraint,
    d: DVector<f64>,
    lambda: f64,
    iterations: usize,
) -> SubproblemResult {
    let x = &ball.anchor + &d;
    let shift = q + &d * l_f + (&ball.grad + &d * ball.curvature) * lambda;
    let stationarity_residual = p1.subdiff_distance(&x, &shift).unwrap_or(f64::NAN);
    let complementarity = lambda * ball.displaced_value(&d);
    SubproblemResult {
        x,
        lambda,
        stationarity_residual,
        complementarity,
        iterations_rootfind: iterations,
    }
}
