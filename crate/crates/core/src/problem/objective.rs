use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dim, Error, Result};

/// The smooth part `f` of the objective.
pub trait SmoothObjective: Send + Sync + core::fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Optional Lipschitz constant of the gradient; the solver never relies on it.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

/// `f(x) = sum_i (d_i x_i^4 / 4 + c_i |x_i|^3 / 3) + x'Qx / 2 + b'x + constant`.
///
/// With `c = d = 0` this is a plain quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyObjective {
    q: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: DVector<f64>,
    constant: f64,
}

impl PolyObjective {
    pub fn new(
        q: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: DVector<f64>,
    ) -> Result<Self> {
        let n = b.len();
        check_dim("Q rows", n, q.nrows())?;
        check_dim("Q cols", n, q.ncols())?;
        check_dim("c", n, c.len())?;
        check_dim("d", n, d.len())?;
        let sym = (&q - q.transpose()).norm();
        if sym > 1e-10 * q.norm().max(1.0) {
            return Err(Error::InvalidArgument("Q must be symmetric".into()));
        }
        if c.iter().chain(d.iter()).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "c and d must be entrywise nonnegative".into(),
            ));
        }
        Ok(Self {
            q,
            b,
            c,
            d,
            constant: 0.0,
        })
    }

    pub fn quadratic(q: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = b.len();
        Self::new(q, b, DVector::zeros(n), DVector::zeros(n))
    }

    /// `||x - center||^2 / 2`.
    pub fn distance_to(center: &DVector<f64>) -> Self {
        let n = center.len();
        Self {
            q: DMatrix::identity(n, n),
            b: -center,
            c: DVector::zeros(n),
            d: DVector::zeros(n),
            constant: 0.5 * center.norm_squared(),
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }
}

impl SmoothObjective for PolyObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut v = self.constant + 0.5 * x.dot(&(&self.q * x)) + self.b.dot(x);
        for i in 0..x.len() {
            let a = x[i].abs();
            v += 0.25 * self.d[i] * a.powi(4) + self.c[i] * a.powi(3) / 3.0;
        }
        v
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.q * x + &self.b;
        for i in 0..x.len() {
            g[i] += self.d[i] * x[i].powi(3) + self.c[i] * x[i] * x[i].abs();
        }
        g
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        if self.c.iter().chain(self.d.iter()).any(|v| *v != 0.0) {
            return None;
        }
        // infinity norm bounds the spectral norm of a symmetric matrix
        let bound = self
            .q
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Some(bound)
    }
}
