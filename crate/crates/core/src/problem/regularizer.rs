use alloc::format;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dim, Error, Result};

/// The prox-friendly convex part `P1` of the objective.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxRegularizer {
    Zero,
    /// `sum_i w_i |x_i|` with nonnegative per-coordinate weights.
    L1(DVector<f64>),
}

impl ProxRegularizer {
    pub fn l1(weights: DVector<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "l1 weights must be finite and nonnegative".into(),
            ));
        }
        Ok(ProxRegularizer::L1(weights))
    }

    pub fn l1_uniform(n: usize, weight: f64) -> Result<Self> {
        Self::l1(DVector::from_element(n, weight))
    }

    /// Dimension the regularizer is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ProxRegularizer::Zero => None,
            ProxRegularizer::L1(w) => Some(w.len()),
        }
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        match self.dim() {
            Some(n) => check_dim("regularizer argument", n, x.len()),
            None => Ok(()),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            ProxRegularizer::Zero => 0.0,
            ProxRegularizer::L1(w) => w.iter().zip(x.iter()).map(|(w, x)| w * x.abs()).sum(),
        })
    }

    /// `argmin_u P1(u) + ||u - z||^2 / (2t)`.
    pub fn prox(&self, z: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        self.check(z)?;
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prox step must be positive, got {t}"
            )));
        }
        Ok(match self {
            ProxRegularizer::Zero => z.clone(),
            ProxRegularizer::L1(w) => z.zip_map(w, |zi, wi| soft_threshold(zi, t * wi)),
        })
    }

    /// `prox_{t P1}(x + delta) - x`, computed without forming `x + delta`
    /// where possible so that small displacements keep their precision.
    pub fn prox_displacement(
        &self,
        x: &DVector<f64>,
        delta: &DVector<f64>,
        t: f64,
    ) -> Result<DVector<f64>> {
        self.check(x)?;
        check_dim("prox displacement", x.len(), delta.len())?;
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prox step must be positive, got {t}"
            )));
        }
        Ok(match self {
            ProxRegularizer::Zero => delta.clone(),
            ProxRegularizer::L1(w) => DVector::from_fn(x.len(), |i, _| {
                let (xi, di, kappa) = (x[i], delta[i], t * w[i]);
                let z = xi + di;
                if z.abs() <= kappa {
                    -xi
                } else if xi != 0.0 && z.signum() == xi.signum() {
                    di - kappa * z.signum()
                } else {
                    soft_threshold(z, kappa) - xi
                }
            }),
        })
    }

    /// `dist(0, u + dP1(x))`, in closed form.
    pub fn subdiff_distance(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        check_dim("subdifferential shift", x.len(), u.len())?;
        Ok(match self {
            ProxRegularizer::Zero => u.norm(),
            ProxRegularizer::L1(w) => {
                let mut sq = 0.0;
                for i in 0..x.len() {
                    let d = if x[i] == 0.0 {
                        (u[i].abs() - w[i]).max(0.0)
                    } else {
                        (u[i] + w[i] * x[i].signum()).abs()
                    };
                    sq += d * d;
                }
                sq.sqrt()
            }
        })
    }
}

pub fn soft_threshold(z: f64, kappa: f64) -> f64 {
    if z > kappa {
        z - kappa
    } else if z < -kappa {
        z + kappa
    } else {
        0.0
    }
}
