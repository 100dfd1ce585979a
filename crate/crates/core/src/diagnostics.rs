//! KKT residuals and approximate-KKT certificates.

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::problem::DCProblem;

/// Witness of an `(eps1, eps2, eps3)`-KKT point.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    /// `dist(0, dP1(x) - xi + grad f(x) + DG(x)^* v)`.
    pub rho: f64,
    /// `-<v, G(x)>`.
    pub complementarity: f64,
    /// `||x - x_prev||`, the distance to the point where `xi` was taken.
    pub step: f64,
    /// Multiplier estimate in the polar cone.
    pub v: DVector<f64>,
    pub eps_triple: (f64, f64, f64),
}

/// Residuals at `x_next` given the previous iterate, the accepted multiplier
/// and the smoothing parameter of the step.
pub fn kkt_residuals(
    prob: &DCProblem,
    x_next: &DVector<f64>,
    x_prev: &DVector<f64>,
    lambda: f64,
    mu: f64,
) -> Result<KktCertificate> {
    check_dim("previous iterate", x_next.len(), x_prev.len())?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument("multiplier must be nonnegative".into()));
    }
    let point = prob.constraint_point(x_next)?;
    let v = point.msa_gradient(mu)? * lambda;
    let xi = prob.concave_subgradient(x_prev)?;
    let u = prob.objective_f_gradient(x_next)? - xi
        + prob.constraint().adjoint_apply(x_next, &v);
    let rho = prob.regularizer().subdiff_distance(x_next, &u)?;
    let complementarity = -v.dot(point.y());
    let step = (x_next - x_prev).norm();
    Ok(KktCertificate {
        rho,
        complementarity,
        step,
        v,
        eps_triple: (rho, complementarity, step),
    })
}

/// The two scaled stopping quantities
/// `sqrt(tau1 mu + lambda tau2) / mu * ||x_next - x_prev|| / max(1, ||x_next||)`
/// and `-<G(x_next), v> / max(1, ||x_next||)`.
#[allow(clippy::too_many_arguments)]
pub fn termination_metrics(
    tau1: f64,
    tau2: f64,
    mu: f64,
    lambda: f64,
    x_prev: &DVector<f64>,
    x_next: &DVector<f64>,
    g_next: &DVector<f64>,
    v: &DVector<f64>,
) -> (f64, f64) {
    let scale = x_next.norm().max(1.0);
    let step = (tau1 * mu + lambda * tau2).sqrt() / mu * (x_next - x_prev).norm() / scale;
    let slack = -g_next.dot(v) / scale;
    (step, slack)
}
